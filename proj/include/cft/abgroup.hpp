#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace cft {

/// Finite abelian group Z/d_1 + ... + Z/d_r in invariant-factor form,
/// d_1 | d_2 | ... | d_r and every d_i >= 2. The empty list is the trivial group.
class AbGroup {
public:
    AbGroup() = default;

    /// Normalizes an arbitrary direct sum of cyclic groups (orders >= 1).
    static AbGroup from_cyclic(const std::vector<long>& orders);
    static AbGroup cyclic(long n) { return from_cyclic({n}); }
    static AbGroup trivial() { return {}; }
    /// (Z/n)^k
    static AbGroup power(long n, long k);

    const std::vector<long>& invariants() const { return d_; }
    bool is_trivial() const { return d_.empty(); }
    mpz_class order() const;
    long exponent() const { return d_.empty() ? 1 : d_.back(); }
    /// Number of cyclic factors of order divisible by the prime p.
    long p_rank(long p) const;

    AbGroup operator+(const AbGroup& other) const;  // direct sum
    /// G / mG
    AbGroup quotient(long m) const;
    /// G[m]
    AbGroup torsion(long m) const;
    /// Sylow p-subgroup.
    AbGroup p_part(long p) const;

    bool operator==(const AbGroup& other) const { return d_ == other.d_; }
    bool operator!=(const AbGroup& other) const { return d_ != other.d_; }

    /// "Z/3 + Z/6", or "0" for the trivial group.
    std::string to_string() const;

private:
    std::vector<long> d_;
};

}  // namespace cft
