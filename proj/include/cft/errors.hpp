#pragma once

#include <stdexcept>
#include <string>

namespace cft {

/// Bad input data: malformed records, singular curves, unsupported fields.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A certified decision could not be made at the available precision.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A structure formula was asked to evaluate outside its hypotheses.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal cross-check failed. Always a bug upstream.
class IntegrityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace cft
