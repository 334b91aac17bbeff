#pragma once

// Finite-precision arithmetic in p-adic fields of the shape
//     Q_p  <  Q_q = Q_p[t]/(g(t))  <  K = Q_q[pi]/(eis(pi)),
// g monic of degree f irreducible mod p, eis Eisenstein of degree e.
//
// Elements are stored as pi^v * u with u a unit of O_K. The unit is kept as
// a coefficient array in the Z_p-basis { pi^i t^j } reduced modulo a fixed
// storage power p^K of the field, together with a relative precision r: the
// element is known modulo pi^(v + r). Zero-to-precision is its own state.

#include <cft/errors.hpp>
#include <cft/ffield.hpp>

#include <gmpxx.h>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cft {

class LocalField;
using FieldPtr = std::shared_ptr<const LocalField>;

/// Coefficients of an element of O_K in the basis pi^i t^j, index i*f + j.
using Integral = std::vector<mpz_class>;

inline constexpr int kDefaultPrecision = 60;
/// Absolute precision passed for values known exactly.
inline constexpr long kExact = 1L << 40;

class LocalField : public std::enable_shared_from_this<LocalField> {
public:
    /// unramified_modulus: monic over F_p, low to high, degree f.
    /// eisenstein: monic, low to high, degree e; each coefficient is an
    /// element of O_unr given by f integer coordinates in the t-basis.
    static FieldPtr make(long p, std::vector<long> unramified_modulus,
                         std::vector<std::vector<mpz_class>> eisenstein,
                         int precision = kDefaultPrecision);
    static FieldPtr qp(long p, int precision = kDefaultPrecision);
    static FieldPtr unramified(long p, int f, int precision = kDefaultPrecision);
    /// Q_p(mu_{p^M}) as the Eisenstein extension by Phi_{p^M}(1 + x).
    static FieldPtr cyclotomic(long p, int M, int precision = kDefaultPrecision);

    long p() const { return p_; }
    int e() const { return e_; }
    int f() const { return f_; }
    int degree() const { return e_ * f_; }
    /// Default working precision in pi-adic digits.
    int precision() const { return precision_; }
    /// Largest relative precision an element may carry (twice the default).
    int precision_cap() const { return 2 * precision_; }
    /// e/(p-1) when integral.
    std::optional<int> e0() const;
    /// M when the field was built as Q_p(mu_{p^M}).
    std::optional<int> cyclotomic_level() const { return cyclotomic_level_; }
    const FiniteField& residue_field() const { return residue_; }
    /// Q_p at the same precision; the field itself when degree() == 1.
    FieldPtr base() const;

    const std::vector<long>& unramified_modulus() const { return residue_.modulus(); }
    /// Non-leading Eisenstein coefficients a_0..a_{e-1} in O_unr.
    const std::vector<std::vector<mpz_class>>& eisenstein() const { return eis_; }

    std::string describe() const;

    // Integral-representation kernel used by KElem. All results are reduced
    // modulo storage_modulus().
    std::size_t dim() const { return static_cast<std::size_t>(e_ * f_); }
    const mpz_class& storage_modulus() const { return pK_; }
    Integral int_zero() const { return Integral(dim(), 0); }
    Integral int_one() const;
    Integral int_from_mpz(const mpz_class& z) const;
    Integral int_mul(const Integral& a, const Integral& b) const;
    Integral int_add(const Integral& a, const Integral& b) const;
    Integral int_neg(const Integral& a) const;
    Integral int_mul_pi(Integral a, long k) const;
    /// Exact division by pi^k; a must be divisible by pi^k.
    Integral int_div_pi(Integral a, long k) const;
    /// pi-adic valuation, capped at cap.
    long int_valuation(const Integral& a, long cap) const;
    Integral int_inverse_unit(const Integral& u) const;
    FiniteField::Elem int_residue(const Integral& a) const;
    Integral int_lift(FiniteField::Elem r) const;
    /// Matrix of multiplication by a on the Z_p-basis (column k = a * b_k).
    std::vector<std::vector<mpz_class>> int_mult_matrix(const Integral& a) const;

private:
    LocalField(long p, std::vector<long> modulus, std::vector<std::vector<mpz_class>> eis,
               int precision);
    void init();
    std::vector<mpz_class> unr_mul(const std::vector<mpz_class>& a,
                                   const std::vector<mpz_class>& b) const;
    void reduce(Integral& a) const;
    void reduce_unr(std::vector<mpz_class>& a) const;

    long p_;
    int f_;
    int e_;
    int precision_;
    int storage_digits_;
    mpz_class pK_;
    FiniteField residue_;
    std::vector<mpz_class> g_;                    // lifted unramified modulus, low to high, monic
    std::vector<std::vector<mpz_class>> eis_;     // a_0..a_{e-1}
    Integral p_over_pi_;                          // p / pi
    std::optional<int> cyclotomic_level_;
    mutable std::shared_ptr<const LocalField> base_;
};

/// Element of a LocalField known modulo pi^abs_precision.
class KElem {
public:
    KElem() = default;

    static KElem zero(FieldPtr field, long abs_precision);
    static KElem one(FieldPtr field);
    static KElem from_int(FieldPtr field, const mpz_class& z, long abs_precision);
    static KElem from_int(FieldPtr field, long z, long abs_precision)
    {
        return from_int(std::move(field), mpz_class(z), abs_precision);
    }
    static KElem from_rational(FieldPtr field, const mpq_class& q, long abs_precision);
    /// Integral element given by basis coefficients, known mod pi^abs_precision.
    static KElem from_integral(FieldPtr field, const Integral& coeffs, long abs_precision);
    /// pi^k with relative precision rel_precision.
    static KElem pi_power(FieldPtr field, long k, long rel_precision);
    /// Exact integer, carried at the field's precision cap.
    static KElem exact(FieldPtr field, const mpz_class& z)
    {
        return from_int(std::move(field), z, kExact);
    }
    /// The element whose only nonzero digits are the residue coordinates of r.
    static KElem lift(FieldPtr field, FiniteField::Elem r, long abs_precision = kExact);

    const FieldPtr& field() const { return field_; }
    bool valid() const { return static_cast<bool>(field_); }
    bool is_zero() const { return rel_ == 0; }
    /// Exact valuation when nonzero; the proven lower bound when zero.
    long valuation() const { return val_; }
    long abs_precision() const { return val_ + rel_; }
    long rel_precision() const { return rel_; }
    const Integral& unit() const { return unit_; }

    KElem operator-() const;
    KElem operator+(const KElem& b) const;
    KElem operator-(const KElem& b) const;
    KElem operator*(const KElem& b) const;
    KElem operator/(const KElem& b) const;
    KElem& operator+=(const KElem& b) { return *this = *this + b; }
    KElem& operator-=(const KElem& b) { return *this = *this - b; }
    KElem& operator*=(const KElem& b) { return *this = *this * b; }
    KElem inverse() const;
    KElem pow(long k) const;
    KElem times_pi(long k) const;
    KElem with_abs_precision(long abs_precision) const;

    /// Element as pi^v * unit expanded to basis coefficients; needs v >= 0.
    Integral to_integral() const;
    /// Residue class of an integral element.
    FiniteField::Elem residue() const;
    /// Congruent to b modulo pi^min(abs precisions).
    bool equals(const KElem& b) const { return (*this - b).is_zero(); }

    /// Integer value when the field is Q_p and the element is integral,
    /// reduced to [0, p^abs_precision).
    mpz_class to_mpz() const;

    std::string to_string() const;

private:
    KElem(FieldPtr field, Integral unit, long val, long rel);
    static KElem make_normalized(FieldPtr field, Integral c, long shift, long abs_precision);
    void check_same_field(const KElem& b) const;

    FieldPtr field_;
    Integral unit_;
    long val_ = 0;
    long rel_ = 0;
};

/// Polynomial over a LocalField, coefficients low to high.
struct KPoly {
    FieldPtr field;
    std::vector<KElem> coeffs;

    static KPoly from_integers(FieldPtr field, const std::vector<mpz_class>& c, long abs_precision);
    long degree() const;
    KElem eval(const KElem& x) const;
    KPoly derivative() const;
    /// g(y) = f(a + y)
    KPoly taylor_shift(const KElem& a) const;
};

/// All roots of f in its field, each certified by substitution.
/// Throws PrecisionError when a root cluster cannot be separated.
std::vector<KElem> hensel_roots(const KPoly& f);

bool is_square(const KElem& a);
bool is_pth_power(const KElem& a);
/// A square root certified by hensel_roots, if a is a square.
std::optional<KElem> square_root(const KElem& a);

/// p-adic logarithm of a principal unit.
KElem plog(const KElem& u);
/// p-adic exponential, defined for v(x) > e/(p-1).
KElem pexp(const KElem& x);

struct TraceNorm {
    KElem trace;
    KElem norm;
};
/// Trace and norm down to Q_p; results live in field()->base().
TraceNorm trace_norm_to_base(const KElem& a);

/// The (q-1)-th root of unity congruent to a unit a.
KElem teichmuller(const KElem& a);

/// Runs body(prec) at the field precision and once more at twice that
/// precision when the first attempt throws PrecisionError.
template <class F>
auto with_precision_retry(const LocalField& field, F&& body) -> decltype(body(0L))
{
    try {
        return body(static_cast<long>(field.precision()));
    } catch (const PrecisionError&) {
        return body(static_cast<long>(field.precision_cap()));
    }
}

}  // namespace cft
