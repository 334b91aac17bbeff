#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cft {

/// Small finite field F_q, q = p^f <= 2^16, elements encoded as integers in
/// [0, q): the coefficient vector (c_0, ..., c_{f-1}) of c_0 + c_1 t + ...
/// is stored as sum c_j p^j. Multiplication goes through log tables. The
/// object is immutable after construction and safe to share across threads.
class FiniteField {
public:
    using Elem = std::uint32_t;

    static constexpr long kMaxOrder = 1L << 16;

    /// F_{p^f} with the lexicographically first monic irreducible modulus.
    FiniteField(long p, int f);
    /// F_p[t]/(modulus); modulus is monic, coefficients low to high.
    FiniteField(long p, std::vector<long> modulus);

    long p() const { return p_; }
    int degree() const { return f_; }
    long q() const { return q_; }
    /// Monic defining polynomial over F_p, coefficients low to high.
    const std::vector<long>& modulus() const { return modulus_; }

    Elem zero() const { return 0; }
    Elem one() const { return 1; }
    Elem from_int(long v) const;
    Elem from_coeffs(std::span<const long> c) const;
    std::vector<long> coeffs(Elem a) const;
    /// The class of t.
    Elem generator_t() const { return f_ == 1 ? 0 : static_cast<Elem>(p_); }

    Elem add(Elem a, Elem b) const;
    Elem sub(Elem a, Elem b) const;
    Elem neg(Elem a) const;
    Elem mul(Elem a, Elem b) const;
    Elem inv(Elem a) const;
    Elem pow(Elem a, std::uint64_t k) const;

    bool is_square(Elem a) const { return sqrt_[a] != kNone; }
    std::optional<Elem> sqrt(Elem a) const;
    /// Inverse of the Frobenius x -> x^p.
    Elem frobenius_inverse(Elem a) const;

    /// Multiplicative generator used for the log tables.
    Elem primitive() const { return primitive_; }

    /// Explicit multiplication by polynomial arithmetic. Kept for testing the
    /// table-driven path.
    Elem mul_reference(Elem a, Elem b) const;

private:
    static constexpr Elem kNone = 0xffffffffu;

    void build();

    long p_;
    int f_;
    long q_;
    std::vector<long> modulus_;
    Elem primitive_ = 0;
    std::vector<std::uint32_t> log_;
    std::vector<Elem> exp_;
    std::vector<Elem> sqrt_;
};

/// True when the monic polynomial (low to high) is irreducible over F_p.
bool is_irreducible_mod_p(const std::vector<long>& poly, long p);

}  // namespace cft
