#include <cft/structure.hpp>

#include <cft/formal_group.hpp>
#include <cft/symbols.hpp>

#include <chrono>
#include <numeric>

namespace cft {

namespace {

long ipow(long b, int k)
{
    long r = 1;
    for (int i = 0; i < k; ++i) {
        if (r > (1L << 62) / b)
            throw DataError("prime power too large");
        r *= b;
    }
    return r;
}

// G / p^n without forming p^n when it would overflow: only the p-part changes
AbGroup quotient_p_power(const AbGroup& G, long p, int n)
{
    int k = 0;
    for (long e = G.exponent(); e % p == 0 && k < n; e /= p)
        ++k;
    return G.quotient(ipow(p, k));
}

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw HypothesisError("hypotheses unmet: " + what);
}

std::string missing(const ConditionsReport& r)
{
    std::string s;
    auto add = [&](bool ok, const char* name) {
        if (!ok)
            s += s.empty() ? name : std::string(", ") + name;
    };
    add(r.good, "good reduction");
    add(r.ordinary, "(Ord)");
    add(r.rat, "(Rat)");
    add(r.ram, "(Ram)");
    return s;
}

}  // namespace

ConditionsReport check_conditions(const WeierstrassCurve& E, long p, int M, std::string id,
                                  bool assume_minimal)
{
    return check_conditions(E, LocalField::cyclotomic(p, M), std::move(id), assume_minimal);
}

ConditionsReport check_conditions(const WeierstrassCurve& E, const FieldPtr& k, std::string id,
                                  bool assume_minimal)
{
    const auto start = std::chrono::steady_clock::now();
    if (!k->cyclotomic_level())
        throw HypothesisError("conditions are decided only over Q_p(mu_{p^M})");
    ConditionsReport r;
    r.p = k->p();
    r.M = *k->cyclotomic_level();
    r.id = std::move(id);
    const ReductionType red = good_ordinary_at(E, r.p, assume_minimal);
    r.good = red.good;
    r.ordinary = red.ordinary;
    r.ap = red.ap;
    if (r.good) {
        r.reduced_group = fq_group_structure(FqCurve::reduce(E, std::make_shared<const FiniteField>(r.p, 1)));
        const TorsionReport tr = torsion_report(E, k, r.p);
        r.rat = tr.full;
        r.rat_checked = true;
        r.root_valuations = tr.x_valuations;
        r.N = r.rat ? compute_N(E, k, r.p, r.M) : 0;
        // k(mu_{p^{N+1}}) / k is totally ramified, and nontrivial exactly when N + 1 > M
        r.ram = r.rat && r.N == r.M;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

bool hypotheses_hold(const ConditionsReport& r)
{
    return r.good && r.ordinary && r.rat && r.ram && r.reduced_group.has_value();
}

AbGroup structure_Kfin(long p, int N, int g, const AbGroup& reduced)
{
    if (N < 0 || g < 1)
        throw DataError("structure formula needs N >= 0 and g >= 1");
    return AbGroup::power(ipow(p, N), g) + reduced;
}

AbGroup structure_Kfin(const ConditionsReport& r)
{
    require(hypotheses_hold(r), missing(r));
    return structure_Kfin(r.p, r.N, 1, *r.reduced_group);
}

AbGroup structure_mod(long p, int N, int g, const AbGroup& reduced, int n)
{
    if (n < 1 || N < 0 || g < 1)
        throw DataError("structure formula needs n >= 1, N >= 0 and g >= 1");
    const AbGroup G = AbGroup::power(ipow(p, std::min(n, N)), g) + quotient_p_power(reduced, p, n);
    if (n <= N) {
        mpz_class expected;
        mpz_ui_pow_ui(expected.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(2 * g * n));
        if (G.order() != expected)
            throw IntegrityError("order of the p^" + std::to_string(n) + " quotient is " + G.order().get_str() +
                                 ", expected p^" + std::to_string(2 * g * n));
    }
    return G;
}

AbGroup structure_mod(const ConditionsReport& r, int n)
{
    require(hypotheses_hold(r), missing(r));
    return structure_mod(r.p, r.N, 1, *r.reduced_group, n);
}

AbGroup structure_prime_to_p(const ConditionsReport& r, long m)
{
    require(r.good && r.reduced_group.has_value(), "good reduction");
    if (m < 1 || std::gcd(m, r.p) != 1)
        throw DataError("the prime-to-p quotient needs m >= 1 prime to p");
    return r.reduced_group->quotient(m);
}

AbGroup albanese_mod(const ConditionsReport& J1, int g1, const ConditionsReport& J2, int g2, int n)
{
    if (n < 1 || g1 < 1 || g2 < 1)
        throw DataError("Albanese formula needs n, g1, g2 >= 1");
    if (J1.p != J2.p)
        throw DataError("both factors must be taken at the same p");
    require(J1.ordinary && J2.ordinary, "(Ord) for both factors");
    require(J1.rat && J1.N >= n && J2.rat && J2.N >= n,
            "all p^" + std::to_string(n) + "-torsion rational on both factors");
    return AbGroup::power(ipow(J1.p, n), static_cast<long>(g1) * g2);
}

KummerShape kummer_image_shape(const WeierstrassCurve& E, const FieldPtr& K, int n, const ConditionsReport& r)
{
    if (n < 1)
        throw DataError("Kummer level needs n >= 1");
    require(r.ordinary, "(Ord)");
    require(r.rat && r.N >= n, "(Rat) at level p^" + std::to_string(n));
    if (K->p() != r.p)
        throw DataError("report and field have different p");
    auto units = UnitsModP::of(K);
    if (units->mu_level() < 1)
        throw HypothesisError("mu_p is not contained in " + K->describe() + ", so (Rat) is impossible");
    const long p = r.p;
    const int s = units->mu_level();
    KummerShape out;
    out.n = n;
    out.g = 1;
    out.dim_Ubar = static_cast<int>(subgroup_Ubar(K).dimension());
    out.dim_kerj = static_cast<int>(subgroup_V(K).dimension());
    out.mattuck_total = out.g * (K->degree() + 2);
    out.formal_d = formal_mod_p_order(E, K, p);
    out.reduced_p_dim = static_cast<int>(r.reduced_group->torsion(p).p_rank(p));
    // U_K / p^n = mu_{p^inf}(K) / p^n + Z_p^[K:Q_p] / p^n and Ker(j) = H^1(K^ur/K, mu_{p^n}(K))
    out.ubar_group = AbGroup::power(ipow(p, n), K->degree()) + AbGroup::cyclic(ipow(p, std::min(n, s)));
    out.kerj_group = AbGroup::cyclic(ipow(p, std::min(n, s)));

    if (out.formal_d + out.reduced_p_dim != out.mattuck_total)
        throw IntegrityError("formal part " + std::to_string(out.formal_d) + " plus reduced p-torsion " +
                             std::to_string(out.reduced_p_dim) + " differs from the Mattuck total " +
                             std::to_string(out.mattuck_total));
    if (out.dim_Ubar + out.dim_kerj != out.mattuck_total)
        throw IntegrityError("unit image and Ker(j) do not fill the Mattuck total");
    mpz_class total;
    mpz_ui_pow_ui(total.get_mpz_t(), static_cast<unsigned long>(p),
                  static_cast<unsigned long>(n * out.mattuck_total));
    if (out.ubar_group.order() * out.kerj_group.order() != total)
        throw IntegrityError("Kummer image at level p^" + std::to_string(n) + " has the wrong order");
    return out;
}

}  // namespace cft
