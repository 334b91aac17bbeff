#pragma once

// Weierstrass curves y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Z,
// over finite fields (by enumeration) and over p-adic fields (by the padic
// module), with division polynomials and p-power torsion rationality.

#include <cft/abgroup.hpp>
#include <cft/ffield.hpp>
#include <cft/padic.hpp>

#include <gmpxx.h>

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cft {

struct Invariants {
    mpz_class b2, b4, b6, b8, c4, c6, disc;
    mpq_class j;
};

class WeierstrassCurve {
public:
    /// Throws DataError when the discriminant vanishes.
    explicit WeierstrassCurve(std::array<mpz_class, 5> a);
    static WeierstrassCurve from_longs(const std::array<long, 5>& a);

    const std::array<mpz_class, 5>& ainvs() const { return a_; }
    const mpz_class& a1() const { return a_[0]; }
    const mpz_class& a2() const { return a_[1]; }
    const mpz_class& a3() const { return a_[2]; }
    const mpz_class& a4() const { return a_[3]; }
    const mpz_class& a6() const { return a_[4]; }
    const Invariants& invariants() const { return inv_; }

    /// Cheap test not (v_p(c4) >= 4 and v_p(disc) >= 12). Every non-minimal
    /// model at p fails it, so passing proves minimality; failing is inconclusive.
    bool passes_minimality_test(long p) const;

    /// The model obtained by x = x' + r, y = y' + s x' + t (u = 1).
    WeierstrassCurve change_coordinates(const mpz_class& r, const mpz_class& s,
                                        const mpz_class& t) const;

    /// "[a1,a2,a3,a4,a6]"
    std::string to_string() const;

private:
    std::array<mpz_class, 5> a_;
    Invariants inv_;
};

Invariants compute_invariants(const std::array<mpz_class, 5>& a);

/// p-adic valuation of a nonzero integer (kExact for zero).
long vp(const mpz_class& z, long p);

struct ReductionType {
    bool good = false;
    bool ordinary = false;
    std::optional<long> ap;         // only for good reduction
    std::optional<long> num_points;  // #E(F_p), only for good reduction
};

/// Reduction data at p from enumeration over F_p. A model with p | disc that
/// fails the minimality test raises DataError unless the caller vouches for
/// minimality (database models are globally minimal).
ReductionType good_ordinary_at(const WeierstrassCurve& E, long p, bool assume_minimal = false);

/// Nonsingular curve over a small finite field.
class FqCurve {
public:
    using Elem = FiniteField::Elem;
    struct Point {
        bool infinity = true;
        Elem x = 0;
        Elem y = 0;
        bool operator==(const Point& o) const
        {
            return infinity == o.infinity && (infinity || (x == o.x && y == o.y));
        }
    };

    /// Throws DataError when singular.
    FqCurve(std::shared_ptr<const FiniteField> k, std::array<Elem, 5> a);
    /// Reduction of an integral model; HypothesisError on bad reduction.
    static FqCurve reduce(const WeierstrassCurve& E, std::shared_ptr<const FiniteField> k);

    const FiniteField& field() const { return *k_; }
    const std::shared_ptr<const FiniteField>& field_ptr() const { return k_; }
    const std::array<Elem, 5>& ainvs() const { return a_; }

    bool on_curve(const Point& P) const;
    Point neg(const Point& P) const;
    Point add(const Point& P, const Point& Q) const;
    Point mul(const Point& P, long n) const;
    /// Order of P, given a multiple of it (e.g. the group order).
    long order(const Point& P, long multiple) const;

    /// Number of points (with O) by discriminant counting over x.
    long count_points() const;
    /// Same count with the x-loop split across OpenMP threads.
    long count_points_parallel(int threads = 0) const;
    std::vector<Point> points() const;

private:
    Elem discriminant_at(Elem x) const;

    std::shared_ptr<const FiniteField> k_;
    std::array<Elem, 5> a_;
    Elem inv2_;
};

/// Invariant factors of E(F_q): exponent from point orders, confirmed by a
/// point of that order; d1 = #E / exponent must divide gcd(exponent, q - 1).
AbGroup fq_group_structure(const FqCurve& E);

/// Division polynomial over Z in x, low to high: psi_m for odd m, psi_m^2
/// for even m (so the roots are x-coordinates of nonzero m-torsion).
std::vector<mpz_class> division_polynomial(const WeierstrassCurve& E, long m);

/// Base change of an integral model to a p-adic field.
struct KCurve {
    FieldPtr K;
    std::array<KElem, 5> a;
    static KCurve from(const WeierstrassCurve& E, FieldPtr K);
};

struct KPoint {
    bool infinity = true;
    KElem x;
    KElem y;
    static KPoint at_infinity() { return {}; }
};

bool on_curve(const KCurve& E, const KPoint& P);
KPoint neg(const KCurve& E, const KPoint& P);
KPoint add(const KCurve& E, const KPoint& P, const KPoint& Q);
KPoint mul(const KCurve& E, const KPoint& P, long n);

/// Outcome of the search for E[m] inside E(K).
struct TorsionReport {
    long m = 0;
    long expected_x_roots = 0;      // (m^2 - 1)/2
    std::vector<KElem> x_roots;     // K-rational roots of psi_m
    std::vector<long> x_valuations; // parallel to x_roots
    std::vector<KPoint> points;     // K-rational nonzero points found
    bool full = false;              // E[m] is contained in E(K)
};

/// Locates the K-rational points of E[m], m odd. Works at the field
/// precision and retries once at twice that precision.
TorsionReport torsion_report(const WeierstrassCurve& E, const FieldPtr& K, long m);

bool has_full_p_torsion(const WeierstrassCurve& E, const FieldPtr& K, long p);

/// Largest n <= M with E[p^n] contained in E(K) for K = Q_p(mu_{p^M}).
/// A PrecisionError names the lower bound established so far.
int compute_N(const WeierstrassCurve& E, const FieldPtr& K, long p, int M);

}  // namespace cft
