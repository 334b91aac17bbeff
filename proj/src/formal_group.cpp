#include <cft/formal_group.hpp>

#include <algorithm>

namespace cft {

namespace {

ZSeries t_var(int D) { return ZSeries::variable(1, D, 0); }

// i(t) = -t / (1 - a1 t - a3 w(t)): the parameter of -P in terms of that of P.
ZSeries inverse_series(const std::array<mpz_class, 5>& a, const ZSeries& w)
{
    const int D = w.truncation();
    const ZSeries t = t_var(D);
    ZSeries den = ZSeries::constant(1, D, 1) - t.scaled(a[0]) - w.scaled(a[2]);
    return -(t * den.inverse());
}

void require_truncation(int D)
{
    if (D < 5)
        throw DataError("formal group truncation must be at least 5");
}

}  // namespace

QSeries to_rational(const ZSeries& s)
{
    QSeries r(s.nvars(), s.truncation());
    s.for_each_monomial([&](const std::array<int, 3>& e, std::size_t) { r.at(e) = mpq_class(s.at(e)); });
    return r;
}

ZSeries formal_w(const std::array<mpz_class, 5>& a, int D)
{
    const ZSeries t = t_var(D);
    const ZSeries t2 = t * t;
    const ZSeries t3 = t2 * t;
    // every pass fixes at least one further coefficient
    ZSeries w = t3;
    for (int it = 0; it <= D; ++it) {
        const ZSeries w2 = w * w;
        ZSeries next = t3 + (t * w).scaled(a[0]) + (t2 * w).scaled(a[1]) + w2.scaled(a[2]) +
                       (t * w2).scaled(a[3]) + (w2 * w).scaled(a[4]);
        if (next == w)
            break;
        w = std::move(next);
    }
    return w;
}

FormalGroupLaw formal_group_from_weierstrass(const WeierstrassCurve& E, int D)
{
    require_truncation(D);
    const auto& a = E.ainvs();
    FormalGroupLaw fg;
    fg.a = a;
    fg.D = D;
    fg.w = formal_w(a, D);
    fg.inverse = inverse_series(a, fg.w);

    // the chord through the points with parameters t1, t2 has slope lambda
    // and intercept nu in the (t, w) plane
    const ZSeries wlong = formal_w(a, D + 1);
    ZSeries lambda(2, D);
    for (int n = 1; n <= D + 1; ++n) {
        const mpz_class& An = wlong.coeff(n);
        if (An == 0)
            continue;
        for (int k = 0; k <= n - 1; ++k)
            lambda.coeff(k, n - 1 - k) += An;
    }
    const ZSeries T1 = ZSeries::variable(2, D, 0);
    const ZSeries T2 = ZSeries::variable(2, D, 1);
    const ZSeries w1 = fg.w.compose({T1});
    const ZSeries nu = w1 - lambda * T1;

    const ZSeries l2 = lambda * lambda;
    const ZSeries num = lambda.scaled(a[0]) + nu.scaled(a[1]) + l2.scaled(a[2]) +
                        (lambda * nu).scaled(2 * a[3]) + (l2 * nu).scaled(3 * a[4]);
    const ZSeries den = ZSeries::constant(2, D, 1) + lambda.scaled(a[1]) + l2.scaled(a[3]) +
                        (l2 * lambda).scaled(a[4]);
    const ZSeries third = -T1 - T2 - num * den.inverse();
    fg.F = fg.inverse.compose({third});
    fg.log = formal_log(E, D);
    return fg;
}

ZSeries FormalGroupLaw::mult(long m) const
{
    const ZSeries t = t_var(D);
    if (m == 0)
        return ZSeries(1, D);
    const long n = m < 0 ? -m : m;
    ZSeries acc = t;
    for (long k = 2; k <= n; ++k)
        acc = F.compose({acc, t});
    return m < 0 ? inverse.compose({acc}) : acc;
}

QSeries formal_log(const WeierstrassCurve& E, int D)
{
    require_truncation(D);
    const auto& a = E.ainvs();
    // V = w / t^3 = 1 + O(t); omega = (2V + t V') / (V (2 - a1 t - a3 t^3 V)) dt
    const ZSeries w = formal_w(a, D + 3);
    ZSeries V(1, D);
    for (int n = 0; n <= D; ++n)
        V.coeff(n) = w.coeff(n + 3);
    const QSeries Vq = to_rational(V);
    const QSeries t = QSeries::variable(1, D, 0);
    QSeries t3 = t * t * t;
    const QSeries numer = Vq.scaled(2) + t * Vq.derivative(0);
    const QSeries denom = Vq * (QSeries::constant(1, D, 2) - t.scaled(mpq_class(a[0])) -
                                (t3 * Vq).scaled(mpq_class(a[2])));
    const QSeries omega = numer * denom.inverse();

    QSeries L(1, D);
    for (int n = 1; n <= D; ++n) {
        const mpq_class& c = omega.coeff(n - 1);
        if (c.get_den() != 1)
            throw IntegrityError("invariant differential has a non-integral coefficient at t^" +
                                 std::to_string(n - 1));
        L.coeff(n) = c / n;
    }
    return L;
}

QSeries compositional_inverse(const QSeries& f)
{
    const int D = f.truncation();
    if (f.nvars() != 1 || f.coeff(0) != 0 || f.coeff(1) != 1)
        throw DataError("compositional inverse needs a series t + O(t^2)");
    const QSeries t = QSeries::variable(1, D, 0);
    QSeries g = t;
    // g <- g - (f(g) - t); each pass corrects the lowest wrong coefficient
    for (int it = 0; it < D; ++it) {
        QSeries err = f.compose({g}) - t;
        if (err.order() > D)
            break;
        g = g - err;
    }
    return g;
}

QSeries mult_via_log(const FormalGroupLaw& fg, long m)
{
    const QSeries Linv = compositional_inverse(fg.log);
    QSeries mL = fg.log.scaled(mpq_class(m));
    if (mL.order() > fg.D)
        return QSeries(1, fg.D);
    return Linv.compose({mL});
}

std::vector<KPoint> formal_torsion_pK(const WeierstrassCurve& E, const FieldPtr& K, long p)
{
    if (vp(E.invariants().disc, p) != 0)
        throw HypothesisError("formal torsion needs good reduction at p");
    const TorsionReport rep = torsion_report(E, K, p);
    std::vector<KPoint> out;
    for (const auto& P : rep.points)
        if (!P.x.is_zero() && P.x.valuation() < 0)
            out.push_back(P);
    return out;
}

int formal_mod_p_order(const WeierstrassCurve& E, const FieldPtr& K, long p)
{
    const std::size_t count = formal_torsion_pK(E, K, p).size() + 1;
    int dim = 0;
    std::size_t rest = count;
    while (rest % static_cast<std::size_t>(p) == 0) {
        rest /= static_cast<std::size_t>(p);
        ++dim;
    }
    if (rest != 1)
        throw IntegrityError("formal p-torsion has " + std::to_string(count) +
                             " elements, not a power of p");
    return static_cast<int>(K->degree()) + dim;
}

}  // namespace cft
