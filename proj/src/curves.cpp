#include "cft/curves.hpp"

#include <cft/errors.hpp>

#include <omp.h>

#include <map>
#include <numeric>
#include <sstream>

namespace cft {

namespace {

using ZPoly = std::vector<mpz_class>;

void trim(ZPoly& a)
{
    while (a.size() > 1 && a.back() == 0)
        a.pop_back();
}

ZPoly zmul(const ZPoly& a, const ZPoly& b)
{
    ZPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0)
            continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    }
    trim(r);
    return r;
}

ZPoly zsub(const ZPoly& a, const ZPoly& b)
{
    ZPoly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i)
        r[i] -= b[i];
    trim(r);
    return r;
}

ZPoly zpow(const ZPoly& a, int k)
{
    ZPoly r{1};
    for (int i = 0; i < k; ++i)
        r = zmul(r, a);
    return r;
}

// Reduced division polynomials h_m: psi_m for odd m, psi_m / psi_2 for even m.
class DivisionPolys {
public:
    explicit DivisionPolys(const Invariants& inv) : F_{inv.b6, 2 * inv.b4, inv.b2, 4}
    {
        F2_ = zmul(F_, F_);
        h_[0] = {0};
        h_[1] = {1};
        h_[2] = {1};
        h_[3] = {inv.b8, 3 * inv.b6, 3 * inv.b4, inv.b2, 3};
        h_[4] = {inv.b4 * inv.b8 - inv.b6 * inv.b6, inv.b2 * inv.b8 - inv.b4 * inv.b6, 10 * inv.b8,
                 10 * inv.b6, 5 * inv.b4, inv.b2, 2};
    }

    const ZPoly& F() const { return F_; }

    const ZPoly& h(long m)
    {
        auto it = h_.find(m);
        if (it != h_.end())
            return it->second;
        const long k = m / 2;
        ZPoly v;
        if (m % 2) {
            ZPoly t1 = zmul(h(k + 2), zpow(h(k), 3));
            ZPoly t2 = zmul(h(k - 1), zpow(h(k + 1), 3));
            if (k % 2 == 0)
                v = zsub(zmul(F2_, t1), t2);
            else
                v = zsub(t1, zmul(F2_, t2));
        } else {
            ZPoly t1 = zmul(h(k + 2), zpow(h(k - 1), 2));
            ZPoly t2 = zmul(h(k - 2), zpow(h(k + 1), 2));
            v = zmul(h(k), zsub(t1, t2));
        }
        return h_[m] = std::move(v);
    }

private:
    ZPoly F_;
    ZPoly F2_;
    std::map<long, ZPoly> h_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Curves over Z

long vp(const mpz_class& z, long p)
{
    if (z == 0)
        return kExact;
    mpz_class t;
    mpz_class pz = p;
    return static_cast<long>(mpz_remove(t.get_mpz_t(), z.get_mpz_t(), pz.get_mpz_t()));
}

Invariants compute_invariants(const std::array<mpz_class, 5>& a)
{
    const auto& [a1, a2, a3, a4, a6] = a;
    Invariants r;
    r.b2 = a1 * a1 + 4 * a2;
    r.b4 = 2 * a4 + a1 * a3;
    r.b6 = a3 * a3 + 4 * a6;
    r.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    r.c4 = r.b2 * r.b2 - 24 * r.b4;
    r.c6 = -r.b2 * r.b2 * r.b2 + 36 * r.b2 * r.b4 - 216 * r.b6;
    r.disc = -r.b2 * r.b2 * r.b8 - 8 * r.b4 * r.b4 * r.b4 - 27 * r.b6 * r.b6 + 9 * r.b2 * r.b4 * r.b6;
    if (4 * r.b8 != r.b2 * r.b6 - r.b4 * r.b4)
        throw IntegrityError("invariant identity 4 b8 = b2 b6 - b4^2 failed");
    if (r.disc != 0) {
        r.j = mpq_class(r.c4 * r.c4 * r.c4, r.disc);
        r.j.canonicalize();
    }
    return r;
}

WeierstrassCurve::WeierstrassCurve(std::array<mpz_class, 5> a) : a_(std::move(a))
{
    inv_ = compute_invariants(a_);
    if (inv_.disc == 0)
        throw DataError("singular Weierstrass equation " + to_string());
}

WeierstrassCurve WeierstrassCurve::from_longs(const std::array<long, 5>& a)
{
    return WeierstrassCurve({mpz_class(a[0]), mpz_class(a[1]), mpz_class(a[2]), mpz_class(a[3]),
                             mpz_class(a[4])});
}

bool WeierstrassCurve::passes_minimality_test(long p) const
{
    const long vc4 = inv_.c4 == 0 ? kExact : vp(inv_.c4, p);
    return !(vc4 >= 4 && vp(inv_.disc, p) >= 12);
}

WeierstrassCurve WeierstrassCurve::change_coordinates(const mpz_class& r, const mpz_class& s,
                                                      const mpz_class& t) const
{
    const auto& [a1, a2, a3, a4, a6] = a_;
    std::array<mpz_class, 5> b;
    b[0] = a1 + 2 * s;
    b[1] = a2 - s * a1 + 3 * r - s * s;
    b[2] = a3 + r * a1 + 2 * t;
    b[3] = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
    b[4] = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
    return WeierstrassCurve(std::move(b));
}

std::string WeierstrassCurve::to_string() const
{
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < 5; ++i)
        os << (i ? "," : "") << a_[i].get_str();
    os << "]";
    return os.str();
}

ReductionType good_ordinary_at(const WeierstrassCurve& E, long p, bool assume_minimal)
{
    ReductionType r;
    r.good = vp(E.invariants().disc, p) == 0;
    if (!r.good) {
        // a unit discriminant already proves minimality; otherwise bad
        // reduction is only meaningful on a minimal model
        if (!assume_minimal && !E.passes_minimality_test(p))
            throw DataError("model " + E.to_string() + " may not be minimal at " + std::to_string(p));
        return r;
    }
    auto k = std::make_shared<const FiniteField>(p, 1);
    const long n = FqCurve::reduce(E, k).count_points();
    r.num_points = n;
    r.ap = p + 1 - n;
    r.ordinary = (*r.ap % p) != 0;
    return r;
}

// ---------------------------------------------------------------------------
// Curves over F_q

FqCurve::FqCurve(std::shared_ptr<const FiniteField> k, std::array<Elem, 5> a)
    : k_(std::move(k)), a_(a)
{
    const auto& K = *k_;
    const auto [a1, a2, a3, a4, a6] = a_;
    auto c = [&](long v) { return K.from_int(v); };
    Elem b2 = K.add(K.mul(a1, a1), K.mul(c(4), a2));
    Elem b4 = K.add(K.mul(c(2), a4), K.mul(a1, a3));
    Elem b6 = K.add(K.mul(a3, a3), K.mul(c(4), a6));
    Elem b8 = K.sub(K.add(K.add(K.mul(K.mul(a1, a1), a6), K.mul(c(4), K.mul(a2, a6))),
                          K.mul(a2, K.mul(a3, a3))),
                    K.add(K.mul(a1, K.mul(a3, a4)), K.mul(a4, a4)));
    Elem d = K.neg(K.mul(K.mul(b2, b2), b8));
    d = K.sub(d, K.mul(c(8), K.pow(b4, 3)));
    d = K.sub(d, K.mul(c(27), K.mul(b6, b6)));
    d = K.add(d, K.mul(c(9), K.mul(b2, K.mul(b4, b6))));
    if (d == 0)
        throw DataError("singular curve over the finite field");
    inv2_ = K.inv(c(2));
}

FqCurve FqCurve::reduce(const WeierstrassCurve& E, std::shared_ptr<const FiniteField> k)
{
    const long p = k->p();
    if (vp(E.invariants().disc, p) != 0)
        throw HypothesisError("bad reduction at " + std::to_string(p));
    std::array<Elem, 5> a;
    for (int i = 0; i < 5; ++i) {
        mpz_class r;
        mpz_class pz = p;
        mpz_mod(r.get_mpz_t(), E.ainvs()[i].get_mpz_t(), pz.get_mpz_t());
        a[i] = k->from_int(r.get_si());
    }
    return FqCurve(std::move(k), a);
}

FqCurve::Elem FqCurve::discriminant_at(Elem x) const
{
    const auto& K = *k_;
    const auto [a1, a2, a3, a4, a6] = a_;
    Elem b = K.add(K.mul(a1, x), a3);
    Elem rhs = K.add(K.mul(K.add(K.mul(K.add(x, a2), x), a4), x), a6);
    return K.add(K.mul(b, b), K.mul(K.from_int(4), rhs));
}

bool FqCurve::on_curve(const Point& P) const
{
    if (P.infinity)
        return true;
    const auto& K = *k_;
    const auto [a1, a2, a3, a4, a6] = a_;
    Elem lhs = K.add(K.mul(P.y, P.y), K.mul(P.y, K.add(K.mul(a1, P.x), a3)));
    Elem rhs = K.add(K.mul(K.add(K.mul(K.add(P.x, a2), P.x), a4), P.x), a6);
    return lhs == rhs;
}

FqCurve::Point FqCurve::neg(const Point& P) const
{
    if (P.infinity)
        return P;
    const auto& K = *k_;
    return {false, P.x, K.sub(K.neg(P.y), K.add(K.mul(a_[0], P.x), a_[2]))};
}

FqCurve::Point FqCurve::add(const Point& P, const Point& Q) const
{
    if (P.infinity)
        return Q;
    if (Q.infinity)
        return P;
    const auto& K = *k_;
    const auto [a1, a2, a3, a4, a6] = a_;
    Elem lambda, nu;
    if (P.x == Q.x) {
        if (K.add(K.add(P.y, Q.y), K.add(K.mul(a1, Q.x), a3)) == 0)
            return {};
        Elem den = K.add(K.add(K.mul(K.from_int(2), P.y), K.mul(a1, P.x)), a3);
        Elem x2 = K.mul(P.x, P.x);
        Elem num_l = K.sub(K.add(K.add(K.mul(K.from_int(3), x2), K.mul(K.mul(K.from_int(2), a2), P.x)), a4),
                           K.mul(a1, P.y));
        Elem num_n = K.sub(K.add(K.add(K.neg(K.mul(x2, P.x)), K.mul(a4, P.x)), K.mul(K.from_int(2), a6)),
                           K.mul(a3, P.y));
        Elem inv = K.inv(den);
        lambda = K.mul(num_l, inv);
        nu = K.mul(num_n, inv);
    } else {
        Elem inv = K.inv(K.sub(Q.x, P.x));
        lambda = K.mul(K.sub(Q.y, P.y), inv);
        nu = K.mul(K.sub(K.mul(P.y, Q.x), K.mul(Q.y, P.x)), inv);
    }
    Elem x3 = K.sub(K.sub(K.sub(K.add(K.mul(lambda, lambda), K.mul(a1, lambda)), a2), P.x), Q.x);
    Elem y3 = K.sub(K.sub(K.neg(K.mul(K.add(lambda, a1), x3)), nu), a3);
    return {false, x3, y3};
}

FqCurve::Point FqCurve::mul(const Point& P, long n) const
{
    if (n < 0)
        return mul(neg(P), -n);
    Point result;
    Point base = P;
    while (n > 0) {
        if (n & 1)
            result = add(result, base);
        n >>= 1;
        if (n)
            base = add(base, base);
    }
    return result;
}

long FqCurve::order(const Point& P, long multiple) const
{
    if (!mul(P, multiple).infinity)
        throw IntegrityError("point order does not divide the given multiple");
    std::vector<long> primes;
    long m = multiple;
    for (long q = 2; q * q <= m; ++q) {
        if (m % q)
            continue;
        primes.push_back(q);
        while (m % q == 0)
            m /= q;
    }
    if (m > 1)
        primes.push_back(m);
    long n = multiple;
    for (long q : primes)
        while (n % q == 0 && mul(P, n / q).infinity)
            n /= q;
    return n;
}

long FqCurve::count_points() const
{
    const auto& K = *k_;
    long total = 1;
    for (long x = 0; x < K.q(); ++x) {
        Elem d = discriminant_at(static_cast<Elem>(x));
        total += d == 0 ? 1 : (K.is_square(d) ? 2 : 0);
    }
    return total;
}

long FqCurve::count_points_parallel(int threads) const
{
    const auto& K = *k_;
    const long q = K.q();
    long total = 1;
    if (threads <= 0)
        threads = omp_get_max_threads();
#pragma omp parallel for reduction(+ : total) num_threads(threads) schedule(static)
    for (long x = 0; x < q; ++x) {
        Elem d = discriminant_at(static_cast<Elem>(x));
        total += d == 0 ? 1 : (K.is_square(d) ? 2 : 0);
    }
    return total;
}

std::vector<FqCurve::Point> FqCurve::points() const
{
    const auto& K = *k_;
    std::vector<Point> out{Point{}};
    for (long xv = 0; xv < K.q(); ++xv) {
        const Elem x = static_cast<Elem>(xv);
        Elem d = discriminant_at(x);
        auto s = K.sqrt(d);
        if (!s)
            continue;
        Elem b = K.add(K.mul(a_[0], x), a_[2]);
        // y = (-b +- s) / 2
        Elem y1 = K.mul(K.sub(*s, b), inv2_);
        out.push_back({false, x, y1});
        if (*s != 0)
            out.push_back({false, x, K.mul(K.sub(K.neg(*s), b), inv2_)});
    }
    return out;
}

AbGroup fq_group_structure(const FqCurve& E)
{
    const long q = E.field().q();
    const auto pts = E.points();
    const long n = static_cast<long>(pts.size());
    if (n != E.count_points())
        throw IntegrityError("point enumeration disagrees with the point count");
    long exponent = 1;
    for (const auto& P : pts) {
        exponent = std::lcm(exponent, E.order(P, n));
        if (exponent == n)
            break;
    }
    bool witnessed = false;
    for (const auto& P : pts) {
        if (E.order(P, exponent) == exponent) {
            witnessed = true;
            break;
        }
    }
    if (!witnessed)
        throw IntegrityError("no point attains the group exponent");
    const long d1 = n / exponent;
    if (n % exponent != 0 || std::gcd(exponent, q - 1) % d1 != 0)
        throw IntegrityError("group structure violates d1 | gcd(d2, q - 1)");
    return AbGroup::from_cyclic({d1, exponent});
}

// ---------------------------------------------------------------------------
// Division polynomials

std::vector<mpz_class> division_polynomial(const WeierstrassCurve& E, long m)
{
    if (m < 1)
        throw DataError("division polynomial index must be >= 1");
    DivisionPolys dp(E.invariants());
    ZPoly h = dp.h(m);
    if (m % 2 == 0)
        h = zmul(dp.F(), zmul(h, h));
    return h;
}

// ---------------------------------------------------------------------------
// Curves over p-adic fields

KCurve KCurve::from(const WeierstrassCurve& E, FieldPtr K)
{
    KCurve c{K, {}};
    for (int i = 0; i < 5; ++i)
        c.a[i] = KElem::exact(K, E.ainvs()[i]);
    return c;
}

bool on_curve(const KCurve& E, const KPoint& P)
{
    if (P.infinity)
        return true;
    const auto& [a1, a2, a3, a4, a6] = E.a;
    KElem lhs = P.y * P.y + a1 * P.x * P.y + a3 * P.y;
    KElem rhs = ((P.x + a2) * P.x + a4) * P.x + a6;
    return (lhs - rhs).is_zero();
}

KPoint neg(const KCurve& E, const KPoint& P)
{
    if (P.infinity)
        return P;
    return {false, P.x, -P.y - E.a[0] * P.x - E.a[2]};
}

KPoint add(const KCurve& E, const KPoint& P, const KPoint& Q)
{
    if (P.infinity)
        return Q;
    if (Q.infinity)
        return P;
    const auto& [a1, a2, a3, a4, a6] = E.a;
    KElem lambda, nu;
    if ((P.x - Q.x).is_zero()) {
        if ((P.y + Q.y + a1 * Q.x + a3).is_zero())
            return KPoint::at_infinity();
        KElem den = P.y + P.y + a1 * P.x + a3;
        if (den.is_zero())
            return KPoint::at_infinity();
        KElem x2 = P.x * P.x;
        KElem three = KElem::exact(E.K, 3), two = KElem::exact(E.K, 2);
        lambda = (three * x2 + two * a2 * P.x + a4 - a1 * P.y) / den;
        nu = (-(x2 * P.x) + a4 * P.x + two * a6 - a3 * P.y) / den;
    } else {
        KElem dx = Q.x - P.x;
        lambda = (Q.y - P.y) / dx;
        nu = (P.y * Q.x - Q.y * P.x) / dx;
    }
    KElem x3 = lambda * lambda + a1 * lambda - a2 - P.x - Q.x;
    KElem y3 = -(lambda + a1) * x3 - nu - a3;
    return {false, x3, y3};
}

KPoint mul(const KCurve& E, const KPoint& P, long n)
{
    if (n < 0)
        return mul(E, neg(E, P), -n);
    KPoint result = KPoint::at_infinity();
    KPoint base = P;
    while (n > 0) {
        if (n & 1)
            result = add(E, result, base);
        n >>= 1;
        if (n)
            base = add(E, base, base);
    }
    return result;
}

TorsionReport torsion_report(const WeierstrassCurve& E, const FieldPtr& K, long m)
{
    if (m < 3 || m % 2 == 0)
        throw DataError("torsion report needs an odd m >= 3");
    const auto psi = division_polynomial(E, m);
    const auto& inv = E.invariants();
    return with_precision_retry(*K, [&](long prec) {
        TorsionReport rep;
        rep.m = m;
        rep.expected_x_roots = (m * m - 1) / 2;
        const KCurve EK = KCurve::from(E, K);
        auto roots = hensel_roots(KPoly::from_integers(K, psi, prec));
        const KElem b2 = KElem::exact(K, inv.b2), b4 = KElem::exact(K, inv.b4),
                    b6 = KElem::exact(K, inv.b6), four = KElem::exact(K, 4),
                    two = KElem::exact(K, 2);
        bool all_y = true;
        for (const auto& x0 : roots) {
            rep.x_roots.push_back(x0);
            rep.x_valuations.push_back(x0.valuation());
            // discriminant of y^2 + (a1 x0 + a3) y - (x0^3 + a2 x0^2 + a4 x0 + a6)
            KElem D = ((four * x0 + b2) * x0 + two * b4) * x0 + b6;
            if (D.is_zero())
                throw PrecisionError("y-discriminant vanishes to precision at an odd torsion root");
            auto s = square_root(D);
            if (!s) {
                all_y = false;
                continue;
            }
            KElem b = EK.a[0] * x0 + EK.a[2];
            for (const KElem& sy : {*s, -*s}) {
                KPoint P{false, x0, (sy - b) / two};
                if (!on_curve(EK, P))
                    throw PrecisionError("torsion point fails the curve equation to precision");
                if (!mul(EK, P, m).infinity)
                    throw PrecisionError("torsion point not certified by [m]P = O");
                rep.points.push_back(P);
            }
        }
        rep.full = all_y && static_cast<long>(roots.size()) == rep.expected_x_roots;
        return rep;
    });
}

bool has_full_p_torsion(const WeierstrassCurve& E, const FieldPtr& K, long p)
{
    return torsion_report(E, K, p).full;
}

int compute_N(const WeierstrassCurve& E, const FieldPtr& K, long p, int M)
{
    int N = 0;
    long m = 1;
    for (int n = 1; n <= M; ++n) {
        m *= p;
        bool full;
        try {
            full = torsion_report(E, K, m).full;
        } catch (const PrecisionError& err) {
            throw PrecisionError(std::string(err.what()) + " (established N >= " + std::to_string(N) + ")");
        }
        if (!full)
            break;
        N = n;
    }
    return N;
}

}  // namespace cft
