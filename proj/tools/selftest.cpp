#include "selftest.hpp"

#include "oracles.hpp"

#include <cft/census.hpp>
#include <cft/symbols.hpp>

#include <chrono>
#include <functional>
#include <ostream>
#include <sstream>

namespace cft::cli {

namespace {

// A suite returns an empty string on success, else the first failure.
using Suite = std::function<std::string()>;

std::string finite_fields()
{
    std::mt19937 rng(101);
    for (auto [p, f] : {std::pair{3L, 1}, {5L, 1}, {7L, 1}, {3L, 2}}) {
        auto k = std::make_shared<const FiniteField>(p, f);
        std::uniform_int_distribution<long> el(0, k->q() - 1);
        for (int done = 0; done < 30;) {
            std::array<FiniteField::Elem, 5> a;
            for (auto& x : a)
                x = static_cast<FiniteField::Elem>(el(rng));
            if (oracle::discriminant(*k, a) == 0)
                continue;
            ++done;
            long n = 0;
            const auto want = oracle::group_invariants(*k, a, &n);
            const FqCurve E(k, a);
            if (E.count_points() != n || fq_group_structure(E).invariants() != want) {
                std::ostringstream os;
                os << "group structure mismatch over F_" << k->q();
                return os.str();
            }
        }
    }
    return {};
}

std::string formal_groups()
{
    const int D = 10;
    for (const auto& E : oracle::random_curves(3, 5)) {
        auto fg = formal_group_from_weierstrass(E, D);
        const ZSeries T1 = ZSeries::variable(3, D, 0), T3 = ZSeries::variable(3, D, 2);
        if (fg.F.compose({oracle::embed(fg.F, 0, 1), T3}) != fg.F.compose({T1, oracle::embed(fg.F, 1, 2)}))
            return "associativity fails for " + E.to_string();
        const QSeries Fq = to_rational(fg.F);
        const QSeries Q1 = QSeries::variable(2, D, 0), Q2 = QSeries::variable(2, D, 1);
        if ((fg.log.compose({Fq}) - fg.log.compose({Q1}) - fg.log.compose({Q2})).order() <= D)
            return "log(F) != log(t1) + log(t2) for " + E.to_string();
        if (fg.log.compose({to_rational(fg.mult(3))}) != fg.log.scaled(mpq_class(3)))
            return "log([3]) != 3 log for " + E.to_string();
    }
    return {};
}

std::string symbols()
{
    auto K = LocalField::cyclotomic(3, 1);
    auto H = HilbertPairing::of(K);
    const long p = 3;
    std::mt19937_64 rng(7);
    const auto one = KElem::one(K);
    for (int i = 0; i < 40; ++i) {
        const KElem a = oracle::random_element(K, rng), b = oracle::random_element(K, rng),
                    c = oracle::random_element(K, rng);
        if ((H->symbol(a, b) + H->symbol(b, a)) % p != 0)
            return "antisymmetry";
        if ((H->symbol(a * c, b) - H->symbol(a, b) - H->symbol(c, b)) % p != 0)
            return "bilinearity";
        if (H->symbol(a, -a) != 0)
            return "(a, -a) != 0";
        const KElem d = one - a;
        if (!d.is_zero() && H->symbol(a, d) != 0)
            return "(a, 1 - a) != 0";
    }
    if (fp_rank(H->gram(), p) != H->units()->dimension())
        return "degenerate Gram matrix";
    if (!(annihilator(subgroup_Ubar(K)) == subgroup_V(K)))
        return "ann(Ubar) != V";
    return {};
}

std::string structure()
{
    auto E = WeierstrassCurve::from_longs({0, 1, 1, -9, -15});  // 19a1
    auto r = check_conditions(E, 3, 1);
    if (!hypotheses_hold(r) || structure_Kfin(r) != AbGroup::from_cyclic({3, 6}))
        return "19a1 should have V_fin = Z/3 + Z/6";
    if (structure_mod(r, 1).order() != 9)
        return "mod-3 quotient of 19a1 should have order 9";
    auto shape = kummer_image_shape(E, LocalField::cyclotomic(3, 1), 1, r);
    if (shape.formal_d != 3 || shape.dim_Ubar != 3 || shape.dim_kerj != 1)
        return "Kummer shape of 19a1";
    auto S = check_conditions(WeierstrassCurve::from_longs({0, 0, 0, -1, 0}), 3, 1);
    if (S.ordinary)
        return "y^2 = x^3 - x is supersingular at 3";
    return {};
}

std::string census()
{
    std::istringstream in("11 a 1 [0,-1,1,-10,-20] 0 5\n19 a 1 [0,1,1,-9,-15] 0 3\n"
                          "26 a 1 [1,0,1,-5,-8] 0 3\n27 a 1 [0,0,1,0,-7] 0 3\n37 b 1 [0,1,1,-23,-50] 0 3\n");
    auto db = parse_database(in, DbFormat::cremona);
    CensusParams P;
    const auto serial = run_census_serial(db.records, P);
    P.jobs = 4;
    const auto par = run_census(db.records, P);
    if (!serial.errors.empty())
        return "census error on " + serial.errors.front().label;
    if (report_json(serial, false) != report_json(par, false))
        return "serial and parallel census reports differ";
    const auto& s = serial.stages;
    if (!(s.total >= s.good && s.good >= s.ordinary && s.ordinary >= s.red_tors && s.red_tors >= s.full_tors))
        return "stage counts are not monotone";
    for (std::size_t i = 0; i < db.records.size(); ++i) {
        const auto& rec = db.records[i];
        const auto& row = serial.rows[i];
        if (rec.conductor % 3 == 0) {
            if (row.stage != 1)
                return rec.label + " has bad reduction";
            continue;
        }
        const long a3 = 4 - oracle::count_f3(rec.ainvs);
        if (*row.report.ap != a3)
            return "a_3 of " + rec.label;
    }
    return {};
}

}  // namespace

int run_selftest(std::ostream& out)
{
    const std::vector<std::pair<const char*, Suite>> suites = {
        {"finite-field group structure", finite_fields},
        {"formal group identities", formal_groups},
        {"Hilbert symbol on Q_3(mu_3)", symbols},
        {"structure formulas", structure},
        {"census pipeline", census},
    };
    int failed = 0;
    for (const auto& [name, run] : suites) {
        const auto start = std::chrono::steady_clock::now();
        std::string problem;
        try {
            problem = run();
        } catch (const std::exception& e) {
            problem = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << (problem.empty() ? "[ok]   " : "[FAIL] ") << name;
        if (!problem.empty())
            out << ": " << problem;
        out << " (" << static_cast<long>(secs * 1000) << " ms)\n";
        failed += !problem.empty();
    }
    return failed;
}

}  // namespace cft::cli
