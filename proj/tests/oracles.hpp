#pragma once

// Independent reference computations shared by the acceptance driver and the
// CLI self-test. Nothing here calls the group law, point counting or
// structure code under test: points are enumerated directly and added with
// textbook affine formulas written out again below.

#include <cft/curves.hpp>
#include <cft/ffield.hpp>
#include <cft/formal_group.hpp>
#include <cft/padic.hpp>

#include <array>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace cft::oracle {

using Elem = FiniteField::Elem;

struct Pt {
    bool inf = true;
    Elem x = 0, y = 0;
    bool operator==(const Pt& o) const { return inf == o.inf && (inf || (x == o.x && y == o.y)); }
};

struct BruteCurve {
    const FiniteField* k;
    std::array<Elem, 5> a;

    Elem lhs_minus_rhs(Elem x, Elem y) const
    {
        const FiniteField& F = *k;
        Elem l = F.add(F.add(F.mul(y, y), F.mul(F.mul(a[0], x), y)), F.mul(a[2], y));
        Elem x2 = F.mul(x, x);
        Elem r = F.add(F.add(F.add(F.mul(x2, x), F.mul(a[1], x2)), F.mul(a[3], x)), a[4]);
        return F.sub(l, r);
    }

    // -P = (x, -y - a1 x - a3)
    Pt neg(const Pt& P) const
    {
        if (P.inf)
            return P;
        const FiniteField& F = *k;
        return {false, P.x, F.sub(F.neg(P.y), F.add(F.mul(a[0], P.x), a[2]))};
    }

    Pt add(const Pt& P, const Pt& Q) const
    {
        if (P.inf)
            return Q;
        if (Q.inf)
            return P;
        const FiniteField& F = *k;
        if (P == neg(Q))
            return {};
        Elem lambda, nu;
        if (P.x == Q.x) {
            // tangent: (3x^2 + 2 a2 x + a4 - a1 y) / (2y + a1 x + a3)
            Elem num = F.add(F.add(F.mul(F.from_int(3), F.mul(P.x, P.x)), F.mul(F.from_int(2), F.mul(a[1], P.x))),
                             F.sub(a[3], F.mul(a[0], P.y)));
            Elem den = F.add(F.add(F.mul(F.from_int(2), P.y), F.mul(a[0], P.x)), a[2]);
            lambda = F.mul(num, F.inv(den));
        } else {
            lambda = F.mul(F.sub(Q.y, P.y), F.inv(F.sub(Q.x, P.x)));
        }
        nu = F.sub(P.y, F.mul(lambda, P.x));
        Elem x3 = F.sub(F.sub(F.sub(F.add(F.mul(lambda, lambda), F.mul(a[0], lambda)), a[1]), P.x), Q.x);
        Elem y3 = F.sub(F.sub(F.neg(F.mul(F.add(lambda, a[0]), x3)), nu), a[2]);
        return {false, x3, y3};
    }

    std::vector<Pt> points() const
    {
        std::vector<Pt> out{Pt{}};
        for (long x = 0; x < k->q(); ++x)
            for (long y = 0; y < k->q(); ++y)
                if (lhs_minus_rhs(static_cast<Elem>(x), static_cast<Elem>(y)) == 0)
                    out.push_back({false, static_cast<Elem>(x), static_cast<Elem>(y)});
        return out;
    }

    long order(const Pt& P) const
    {
        long n = 1;
        for (Pt Q = P; !Q.inf; Q = add(Q, P))
            ++n;
        return n;
    }
};

/// Invariant factors of E(F_q) from enumeration: the group has rank <= 2,
/// the exponent is the largest point order, and d1 = #E / exponent.
inline std::vector<long> group_invariants(const FiniteField& k, const std::array<Elem, 5>& a, long* count = nullptr)
{
    BruteCurve E{&k, a};
    const auto pts = E.points();
    long exponent = 1;
    for (const auto& P : pts)
        exponent = std::lcm(exponent, E.order(P));
    const long n = static_cast<long>(pts.size());
    if (count)
        *count = n;
    std::vector<long> out;
    if (n / exponent > 1)
        out.push_back(n / exponent);
    if (exponent > 1)
        out.push_back(exponent);
    return out;
}

/// Discriminant of an a-invariant vector over F_q, computed from b2..b8.
inline Elem discriminant(const FiniteField& F, const std::array<Elem, 5>& a)
{
    auto c = [&](long v) { return F.from_int(v); };
    Elem b2 = F.add(F.mul(a[0], a[0]), F.mul(c(4), a[1]));
    Elem b4 = F.add(F.mul(c(2), a[3]), F.mul(a[0], a[2]));
    Elem b6 = F.add(F.mul(a[2], a[2]), F.mul(c(4), a[4]));
    Elem b8 = F.sub(F.add(F.sub(F.add(F.mul(F.mul(a[0], a[0]), a[4]), F.mul(c(4), F.mul(a[1], a[4]))),
                                F.mul(F.mul(a[0], a[2]), a[3])),
                          F.mul(F.mul(a[1], a[2]), a[2])),
                    F.mul(a[3], a[3]));
    Elem t1 = F.neg(F.mul(F.mul(b2, b2), b8));
    Elem t2 = F.mul(c(8), F.mul(F.mul(b4, b4), b4));
    Elem t3 = F.mul(c(27), F.mul(b6, b6));
    Elem t4 = F.mul(c(9), F.mul(F.mul(b2, b4), b6));
    return F.add(F.sub(F.sub(t1, t2), t3), t4);
}

/// #E~(F_3) for an integral model, by trying the nine affine points.
inline long count_f3(const std::array<mpz_class, 5>& A)
{
    std::array<long, 5> a{};
    for (std::size_t i = 0; i < 5; ++i) {
        mpz_class r = A[i] % 3;
        a[i] = (r < 0 ? r + 3 : r).get_si();
    }
    long n = 1;
    for (long x = 0; x < 3; ++x)
        for (long y = 0; y < 3; ++y) {
            const long lhs = y * y + a[0] * x * y + a[2] * y;
            const long rhs = x * x * x + a[1] * x * x + a[3] * x + a[4];
            n += ((lhs - rhs) % 3 + 3) % 3 == 0;
        }
    return n;
}

/// Nonsingular integral models with coefficients in [-r, r].
inline std::vector<WeierstrassCurve> random_curves(int count, unsigned seed, long r = 6)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<long> coef(-r, r);
    std::vector<WeierstrassCurve> out;
    while (static_cast<int>(out.size()) < count) {
        std::array<long, 5> a;
        for (auto& x : a)
            x = coef(rng);
        try {
            out.push_back(WeierstrassCurve::from_longs(a));
        } catch (const DataError&) {
        }
    }
    return out;
}

/// F(t_i, t_j) as a series in three variables.
inline ZSeries embed(const ZSeries& F, int i, int j)
{
    const int D = F.truncation();
    return F.compose({ZSeries::variable(3, D, i), ZSeries::variable(3, D, j)});
}

/// A nonzero element pi^s * (random integral unit-or-not), s in [-max_shift, max_shift].
inline KElem random_element(const FieldPtr& K, std::mt19937_64& rng, int max_shift = 3)
{
    for (;;) {
        Integral c = K->int_zero();
        for (auto& x : c)
            x = mpz_class(static_cast<unsigned long>(rng() % 1000003));
        KElem a = KElem::from_integral(K, c, K->precision());
        if (a.is_zero())
            continue;
        return a.times_pi(static_cast<long>(rng() % (2 * max_shift + 1)) - max_shift);
    }
}

}  // namespace cft::oracle
