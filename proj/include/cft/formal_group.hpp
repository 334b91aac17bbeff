#pragma once

// Formal group of a Weierstrass curve in the parameter t = -x/y, as
// truncated power series with exact integer or rational coefficients.

#include <cft/curves.hpp>
#include <cft/errors.hpp>

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

namespace cft {

/// Truncated power series in 1..3 variables; all terms of total degree > D
/// are dropped. Coefficients are stored densely on the (D+1)^k cube.
template <class T>
class Series {
public:
    Series() = default;
    Series(int nvars, int D) : k_(nvars), D_(D), c_(cube(nvars, D), T(0))
    {
        if (nvars < 1 || nvars > 3 || D < 0)
            throw DataError("series needs 1..3 variables and D >= 0");
    }

    static Series variable(int nvars, int D, int i)
    {
        Series s(nvars, D);
        std::array<int, 3> e{0, 0, 0};
        e[i] = 1;
        if (D >= 1)
            s.at(e) = T(1);
        return s;
    }
    static Series constant(int nvars, int D, const T& v)
    {
        Series s(nvars, D);
        s.c_[0] = v;
        return s;
    }

    int nvars() const { return k_; }
    int truncation() const { return D_; }

    T& at(const std::array<int, 3>& e) { return c_[index(e)]; }
    const T& at(const std::array<int, 3>& e) const { return c_[index(e)]; }
    /// Coefficient of t^i (one variable) or t1^i t2^j, t1^i t2^j t3^l.
    const T& coeff(int i, int j = 0, int l = 0) const { return at({i, j, l}); }
    T& coeff(int i, int j = 0, int l = 0) { return at({i, j, l}); }

    /// Lowest total degree with a nonzero coefficient (D + 1 for zero).
    int order() const
    {
        int best = D_ + 1;
        for_each_monomial([&](const std::array<int, 3>& e, std::size_t idx) {
            if (c_[idx] != 0)
                best = std::min(best, e[0] + e[1] + e[2]);
        });
        return best;
    }

    Series operator+(const Series& b) const
    {
        check(b);
        Series r = *this;
        for (std::size_t i = 0; i < c_.size(); ++i)
            r.c_[i] += b.c_[i];
        return r;
    }
    Series operator-(const Series& b) const
    {
        check(b);
        Series r = *this;
        for (std::size_t i = 0; i < c_.size(); ++i)
            r.c_[i] -= b.c_[i];
        return r;
    }
    Series operator-() const
    {
        Series r = *this;
        for (auto& x : r.c_)
            x = -x;
        return r;
    }
    Series scaled(const T& s) const
    {
        Series r = *this;
        for (auto& x : r.c_)
            x *= s;
        return r;
    }
    Series operator*(const Series& b) const
    {
        check(b);
        Series r(k_, D_);
        // nonzero terms of b by total degree, so the inner loop can stop early
        struct Term {
            int deg;
            std::array<int, 3> e;
            std::size_t idx;
        };
        std::vector<Term> nb;
        b.for_each_monomial([&](const std::array<int, 3>& e, std::size_t idx) {
            if (b.c_[idx] != 0)
                nb.push_back({e[0] + e[1] + e[2], e, idx});
        });
        std::stable_sort(nb.begin(), nb.end(), [](const Term& x, const Term& y) { return x.deg < y.deg; });
        T prod;
        for_each_monomial([&](const std::array<int, 3>& ea, std::size_t ia) {
            if (c_[ia] == 0)
                return;
            const int room = D_ - (ea[0] + ea[1] + ea[2]);
            for (const auto& tb : nb) {
                if (tb.deg > room)
                    break;
                prod = c_[ia] * b.c_[tb.idx];
                r.at({ea[0] + tb.e[0], ea[1] + tb.e[1], ea[2] + tb.e[2]}) += prod;
            }
        });
        return r;
    }
    bool operator==(const Series& b) const { return k_ == b.k_ && D_ == b.D_ && c_ == b.c_; }
    bool operator!=(const Series& b) const { return !(*this == b); }

    /// Multiplicative inverse; requires an invertible constant term.
    Series inverse() const
    {
        if (c_[0] == 0)
            throw DataError("series with zero constant term is not invertible");
        // 1/(c (1 - u)) = (1/c) sum u^n
        const T c0 = c_[0];
        Series u = scaled(T(1) / c0);
        u.c_[0] = 0;
        u = -u;
        Series result = constant(k_, D_, T(1));
        Series power = result;
        for (int n = 1; n <= D_; ++n) {
            power = power * u;
            result = result + power;
        }
        return result.scaled(T(1) / c0);
    }

    /// Substitutes series subs[i] (all in a common ring, positive order)
    /// for variable i. Supports one- and two-variable outer series.
    Series compose(const std::vector<Series>& subs) const
    {
        if (static_cast<int>(subs.size()) != k_ || k_ > 2)
            throw DataError("composition supports one or two outer variables");
        for (const auto& s : subs)
            if (s.order() < 1)
                throw DataError("composition needs inner series of positive order");
        const int kv = subs[0].k_, D = subs[0].D_;
        std::vector<Series> pu = powers(subs[0], std::min(D, D_));
        if (k_ == 1) {
            Series r(kv, D);
            for (int i = 0; i <= std::min(D, D_); ++i)
                if (coeff(i) != 0)
                    r = r + pu[i].scaled(coeff(i));
            return r;
        }
        std::vector<Series> pv = powers(subs[1], std::min(D, D_));
        Series r(kv, D);
        for (int j = 0; j <= std::min(D, D_); ++j) {
            Series inner(kv, D);
            bool any = false;
            for (int i = 0; i + j <= D_ && i <= D; ++i) {
                if (coeff(i, j) == 0)
                    continue;
                inner = inner + pu[i].scaled(coeff(i, j));
                any = true;
            }
            if (any)
                r = r + inner * pv[j];
        }
        return r;
    }

    /// Formal derivative in variable i.
    Series derivative(int i) const
    {
        Series r(k_, D_);
        for_each_monomial([&](const std::array<int, 3>& e, std::size_t idx) {
            if (e[i] == 0 || c_[idx] == 0)
                return;
            auto f = e;
            --f[i];
            r.at(f) += c_[idx] * T(e[i]);
        });
        return r;
    }

    template <class F>
    void for_each_monomial(F&& fn) const
    {
        const int D = D_;
        for (int a = 0; a <= D; ++a) {
            if (k_ == 1) {
                fn(std::array<int, 3>{a, 0, 0}, static_cast<std::size_t>(a));
                continue;
            }
            for (int b = 0; a + b <= D; ++b) {
                if (k_ == 2) {
                    fn(std::array<int, 3>{a, b, 0}, index({a, b, 0}));
                    continue;
                }
                for (int c = 0; a + b + c <= D; ++c)
                    fn(std::array<int, 3>{a, b, c}, index({a, b, c}));
            }
        }
    }

private:
    static std::size_t cube(int k, int D)
    {
        std::size_t n = 1;
        for (int i = 0; i < k; ++i)
            n *= static_cast<std::size_t>(D + 1);
        return n;
    }
    std::size_t index(const std::array<int, 3>& e) const
    {
        const std::size_t s = static_cast<std::size_t>(D_ + 1);
        std::size_t idx = static_cast<std::size_t>(e[0]);
        if (k_ >= 2)
            idx += s * static_cast<std::size_t>(e[1]);
        if (k_ >= 3)
            idx += s * s * static_cast<std::size_t>(e[2]);
        return idx;
    }
    void check(const Series& b) const
    {
        if (k_ != b.k_ || D_ != b.D_)
            throw DataError("series shapes differ");
    }
    static std::vector<Series> powers(const Series& s, int n)
    {
        std::vector<Series> out;
        out.push_back(constant(s.k_, s.D_, T(1)));
        for (int i = 1; i <= n; ++i)
            out.push_back(out.back() * s);
        return out;
    }

    int k_ = 1;
    int D_ = 0;
    std::vector<T> c_;
};

using ZSeries = Series<mpz_class>;
using QSeries = Series<mpq_class>;

/// Converts integer coefficients to rationals.
QSeries to_rational(const ZSeries& s);

inline constexpr int kDefaultTruncation = 12;

struct FormalGroupLaw {
    std::array<mpz_class, 5> a;
    int D = kDefaultTruncation;
    ZSeries w;         // w(t) = -1/y as a series in t = -x/y
    ZSeries F;         // F(t1, t2)
    ZSeries inverse;   // i(t) with F(t, i(t)) = 0
    QSeries log;       // L(t)

    /// [m](t) by iterating F; negative m through the inverse series.
    ZSeries mult(long m) const;
};

/// w(t) to order D by the fixed-point recursion.
ZSeries formal_w(const std::array<mpz_class, 5>& a, int D);
FormalGroupLaw formal_group_from_weierstrass(const WeierstrassCurve& E, int D = kDefaultTruncation);
/// Integral of the invariant differential; its coefficients times n are checked
/// to be integral for the coefficient of t^n. Throws IntegrityError otherwise.
QSeries formal_log(const WeierstrassCurve& E, int D = kDefaultTruncation);
/// Compositional inverse of a series of the form t + O(t^2).
QSeries compositional_inverse(const QSeries& f);
/// [m](t) built as L^{-1}(m L(t)).
QSeries mult_via_log(const FormalGroupLaw& fg, long m);

/// Points of E[p](K) reducing to O (negative x-valuation).
std::vector<KPoint> formal_torsion_pK(const WeierstrassCurve& E, const FieldPtr& K, long p);
/// d with #E^(m_K)/p = p^d: [K:Q_p] + dim E^[p](K).
int formal_mod_p_order(const WeierstrassCurve& E, const FieldPtr& K, long p);

}  // namespace cft
