#include <doctest.h>

#include <cft/formal_group.hpp>

#include <random>

using namespace cft;

namespace {

std::vector<WeierstrassCurve> sample_curves(int count, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<long> coef(-6, 6);
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

// F(t1,t2) re-expressed in three variables with t3 unused (or shifted to t2,t3)
ZSeries embed(const ZSeries& F, int i, int j)
{
    const int D = F.truncation();
    return F.compose({ZSeries::variable(3, D, i), ZSeries::variable(3, D, j)});
}

}  // namespace

TEST_CASE("w(t) against its known low-order expansion")
{
    for (const auto& E : sample_curves(10, 7)) {
        const auto& a = E.ainvs();
        auto w = formal_w(a, 8);
        // w = t^3 + a1 t^4 + (a1^2 + a2) t^5 + (a1^3 + 2 a1 a2 + a3) t^6 + ...
        CHECK(w.coeff(0) == 0);
        CHECK(w.coeff(2) == 0);
        CHECK(w.coeff(3) == 1);
        CHECK(w.coeff(4) == a[0]);
        CHECK(w.coeff(5) == a[0] * a[0] + a[1]);
        CHECK(w.coeff(6) == a[0] * a[0] * a[0] + 2 * a[0] * a[1] + a[2]);
        // (x, y) = (t/w, -1/w) lies on E: w = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2 + a6 w^3
        const ZSeries t = ZSeries::variable(1, 8, 0);
        const ZSeries rhs = t * t * t + (t * w).scaled(a[0]) + (t * t * w).scaled(a[1]) +
                            (w * w).scaled(a[2]) + (t * w * w).scaled(a[3]) +
                            (w * w * w).scaled(a[4]);
        CHECK(rhs == w);
    }
}

TEST_CASE("group law low-order terms")
{
    for (const auto& E : sample_curves(10, 11)) {
        const auto& a = E.ainvs();
        auto fg = formal_group_from_weierstrass(E, 12);
        const auto& F = fg.F;
        // chord-tangent expansion up to total degree 4
        CHECK(F.coeff(0, 0) == 0);
        CHECK(F.coeff(1, 0) == 1);
        CHECK(F.coeff(0, 1) == 1);
        CHECK(F.coeff(2, 0) == 0);
        CHECK(F.coeff(1, 1) == -a[0]);
        CHECK(F.coeff(0, 2) == 0);
        CHECK(F.coeff(2, 1) == -a[1]);
        CHECK(F.coeff(1, 2) == -a[1]);
        CHECK(F.coeff(3, 0) == 0);
        CHECK(F.coeff(3, 1) == -2 * a[2]);
        CHECK(F.coeff(1, 3) == -2 * a[2]);
        CHECK(F.coeff(2, 2) == a[0] * a[1] - 3 * a[2]);
        CHECK(F.coeff(4, 0) == 0);
        for (int n = 2; n <= 12; ++n) {
            CHECK(F.coeff(n, 0) == 0);  // F(t, 0) = t
            CHECK(F.coeff(0, n) == 0);
        }
        for (int i = 0; i <= 12; ++i)
            for (int j = 0; i + j <= 12; ++j)
                CHECK(F.coeff(i, j) == F.coeff(j, i));
        // [2](t) = 2t - a1 t^2 - 2 a2 t^3 + (a1 a2 - 7 a3) t^4 + ...
        auto two = fg.mult(2);
        CHECK(two.coeff(1) == 2);
        CHECK(two.coeff(2) == -a[0]);
        CHECK(two.coeff(3) == -2 * a[1]);
        CHECK(two.coeff(4) == a[0] * a[1] - 7 * a[2]);
        // F(t, i(t)) = 0
        const ZSeries t = ZSeries::variable(1, 12, 0);
        CHECK(F.compose({t, fg.inverse}).order() > 12);
        CHECK(fg.mult(-1) == fg.inverse);
        CHECK(fg.mult(0).order() > 12);
    }
    auto short_form = WeierstrassCurve::from_longs({0, 0, 0, 3, -2});
    auto two = formal_group_from_weierstrass(short_form, 6).mult(2);
    CHECK(two.coeff(1) == 2);
    CHECK(two.coeff(2) == 0);
}

TEST_CASE("associativity, logarithm and multiplication series at D = 12")
{
    const int D = 12;
    for (const auto& E : sample_curves(4, 23)) {
        auto fg = formal_group_from_weierstrass(E, D);
        const ZSeries T1 = ZSeries::variable(3, D, 0), T2 = ZSeries::variable(3, D, 1),
                      T3 = ZSeries::variable(3, D, 2);
        const ZSeries left = fg.F.compose({embed(fg.F, 0, 1), T3});
        const ZSeries right = fg.F.compose({T1, embed(fg.F, 1, 2)});
        CHECK(left == right);

        const QSeries& L = fg.log;
        CHECK(L.coeff(0) == 0);
        CHECK(L.coeff(1) == 1);
        mpq_class half_a1(E.a1(), 2);
        half_a1.canonicalize();
        CHECK(L.coeff(2) == half_a1);
        const QSeries Fq = to_rational(fg.F);
        const QSeries Q1 = QSeries::variable(2, D, 0), Q2 = QSeries::variable(2, D, 1);
        CHECK((L.compose({Fq}) - L.compose({Q1}) - L.compose({Q2})).order() > D);

        for (long m : {2L, 3L, 5L, -2L}) {
            const QSeries rec = to_rational(fg.mult(m));
            CHECK(rec == mult_via_log(fg, m));
            CHECK(L.compose({rec}) == L.scaled(mpq_class(m)));
        }
    }
}

TEST_CASE("series plumbing")
{
    const QSeries t = QSeries::variable(1, 8, 0);
    const QSeries f = t + t * t.scaled(3) + t * t * t;
    const QSeries g = compositional_inverse(f);
    CHECK(f.compose({g}) == t);
    CHECK(g.compose({f}) == t);
    CHECK_THROWS_AS(compositional_inverse(t * t), DataError);
    CHECK_THROWS_AS(t.compose({QSeries::constant(1, 8, 1)}), DataError);
    CHECK_THROWS_AS(formal_group_from_weierstrass(WeierstrassCurve::from_longs({0, 0, 0, 1, 1}), 4),
                    DataError);
    const QSeries one_minus = QSeries::constant(1, 8, 1) - t;
    const QSeries geo = one_minus.inverse();
    for (int n = 0; n <= 8; ++n)
        CHECK(geo.coeff(n) == 1);
}

TEST_CASE("formal torsion over Q_3(zeta_3)")
{
    auto K = LocalField::cyclotomic(3, 1);
    auto E = WeierstrassCurve::from_longs({0, 1, 1, -9, -15});
    const KCurve EK = KCurve::from(E, K);
    auto pts = formal_torsion_pK(E, K, 3);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x.valuation() == -2);
    CHECK(pts[0].x.equals(pts[1].x));
    for (const auto& P : pts) {
        CHECK(mul(EK, P, 3).infinity);
        // closed under negation and under the group law
        const KPoint minus = neg(EK, P);
        CHECK(std::any_of(pts.begin(), pts.end(), [&](const KPoint& Q) { return Q.y.equals(minus.y); }));
        const KPoint twice = add(EK, P, P);
        REQUIRE_FALSE(twice.infinity);
        CHECK(std::any_of(pts.begin(), pts.end(), [&](const KPoint& Q) { return Q.y.equals(twice.y); }));
    }
    CHECK(add(EK, pts[0], pts[1]).infinity);
    CHECK(formal_mod_p_order(E, K, 3) == 3);

    // over Q_3 the formal group has no 3-torsion: d = [K:Q_3]
    CHECK(formal_torsion_pK(E, LocalField::qp(3), 3).empty());
    CHECK(formal_mod_p_order(E, LocalField::qp(3), 3) == 1);

    // supersingular over Q_3: empty
    auto S = WeierstrassCurve::from_longs({0, 0, 0, -1, 0});
    CHECK(formal_torsion_pK(S, LocalField::qp(3), 3).empty());

    // full 3-torsion fails while the formal part is rational: only the
    // formal points are reported, a subset of those found by the torsion search
    auto G = WeierstrassCurve::from_longs({0, 1, 1, 0, 0});
    auto rep = torsion_report(G, K, 3);
    CHECK_FALSE(rep.full);
    auto fpts = formal_torsion_pK(G, K, 3);
    CHECK(fpts.size() == 2);
    long negative = 0;
    for (const auto& P : rep.points)
        negative += P.x.valuation() < 0;
    CHECK(negative == static_cast<long>(fpts.size()));
    CHECK(formal_mod_p_order(G, K, 3) == 3);

    CHECK_THROWS_AS(formal_torsion_pK(WeierstrassCurve::from_longs({0, 0, 1, 0, -7}), K, 3),
                    HypothesisError);
}
