#include <doctest.h>

#include <cft/symbols.hpp>

#include <random>
#include <set>
#include <thread>

using namespace cft;

namespace {

KElem random_element(const FieldPtr& K, std::mt19937_64& rng, int max_shift = 3)
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

FpVector add_vec(const FpVector& a, const FpVector& b, long p)
{
    FpVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        r[i] = (a[i] + b[i]) % p;
    return r;
}

}  // namespace

TEST_CASE("F_p linear algebra")
{
    const long p = 5;
    std::vector<FpVector> rows = {{1, 2, 3}, {2, 4, 6}, {0, 1, 1}};
    CHECK(fp_rank(rows, p) == 2);
    auto null = fp_nullspace(rows, 3, p);
    REQUIRE(null.size() == 1);
    for (const auto& r : rows) {
        long dot = 0;
        for (std::size_t i = 0; i < 3; ++i)
            dot += r[i] * null[0][i];
        CHECK(dot % p == 0);
    }
    CHECK(fp_nullspace({}, 4, p).size() == 4);
    CHECK(fp_echelon({{0, 0}}, p).empty());
}

TEST_CASE("Q_3^x / 3 against the mod-9 cube criterion")
{
    auto K = LocalField::qp(3);
    auto B = UnitsModP::of(K);
    CHECK(B->dimension() == 2);
    CHECK(B->mu_level() == 0);
    CHECK_FALSE(B->zeta_index());
    // an integer prime to 3 is a cube in Z_3 exactly when it is +-1 mod 9
    for (long a = 1; a < 200; ++a) {
        if (a % 3 == 0)
            continue;
        auto c = B->coordinates(KElem::exact(K, mpz_class(a)));
        CHECK(c[0] == 0);
        CHECK((c[1] == 0) == (a % 9 == 1 || a % 9 == 8));
    }
    CHECK(B->coordinates(KElem::exact(K, mpz_class(3))) == FpVector{1, 0});
    CHECK(B->coordinates(KElem::exact(K, mpz_class(18))) ==
          add_vec(FpVector{2, 0}, B->coordinates(KElem::exact(K, mpz_class(2))), 3));
    CHECK_THROWS_AS(subgroup_V(K), HypothesisError);
    CHECK_THROWS_AS(HilbertPairing::of(K), HypothesisError);
    CHECK_THROWS_AS(B->coordinates(KElem::zero(K, 10)), DataError);
}

TEST_CASE("basis dimensions and coordinates")
{
    auto K3 = LocalField::cyclotomic(3, 1);
    auto K5 = LocalField::cyclotomic(5, 1);
    CHECK(UnitsModP::of(K3)->dimension() == 4);
    CHECK(UnitsModP::of(K5)->dimension() == 6);
    CHECK(UnitsModP::of(LocalField::cyclotomic(3, 2))->dimension() == 8);
    CHECK(UnitsModP::of(LocalField::unramified(3, 2))->dimension() == 3);
    CHECK(UnitsModP::of(K3) == UnitsModP::of(K3));

    for (auto K : {K3, K5}) {
        auto B = UnitsModP::of(K);
        const long p = K->p();
        CHECK(B->mu_level() == 1);
        // zeta is a root of Phi_p
        KElem s = KElem::zero(K, kExact);
        for (long k = 0; k < p; ++k)
            s += B->zeta().pow(k);
        CHECK(s.is_zero());
        const KElem pi = KElem::pi_power(K, 1, K->precision());
        FpVector e0(B->dimension(), 0);
        e0[0] = 1;
        CHECK(B->coordinates(pi) == e0);
        for (std::size_t j = 0; j < B->dimension(); ++j) {
            FpVector ej(B->dimension(), 0);
            ej[j] = 1;
            CHECK(B->coordinates(B->basis()[j]) == ej);
        }
        const KElem u1 = B->basis()[2];
        FpVector want = B->coordinates(u1);
        want[0] = 2 % p;
        CHECK(B->coordinates(pi * pi * u1) == want);

        std::mt19937_64 rng(static_cast<unsigned>(p));
        for (int it = 0; it < 40; ++it) {
            const KElem a = random_element(K, rng), b = random_element(K, rng);
            CHECK(B->coordinates(a * b) == add_vec(B->coordinates(a), B->coordinates(b), p));
            const FpVector zero(B->dimension(), 0);
            CHECK(B->coordinates(a.pow(p)) == zero);
        }
    }
}

TEST_CASE("unit subgroups")
{
    auto K = LocalField::cyclotomic(3, 1);
    auto U = subgroup_Ubar(K);
    auto V = subgroup_V(K);
    CHECK(U.dimension() == 3);
    CHECK(V.dimension() == 1);
    CHECK(U.contains(V.basis[0]));
    auto K5 = LocalField::cyclotomic(5, 1);
    CHECK(subgroup_Ubar(K5).dimension() == 5);
    CHECK(subgroup_V(K5).dimension() == 1);
}

TEST_CASE("Hilbert pairing properties")
{
    for (auto K : {LocalField::cyclotomic(3, 1), LocalField::cyclotomic(5, 1)}) {
        auto H = HilbertPairing::of(K);
        auto B = H->units();
        const long p = K->p();
        const std::size_t n = B->dimension();
        CHECK(fp_rank(H->gram(), p) == n);
        std::mt19937_64 rng(99 + static_cast<unsigned>(p));
        for (int it = 0; it < 60; ++it) {
            const KElem a = random_element(K, rng), a2 = random_element(K, rng), b = random_element(K, rng);
            CHECK(H->symbol(a * a2, b) == (H->symbol(a, b) + H->symbol(a2, b)) % p);
            CHECK((H->symbol(a, b) + H->symbol(b, a)) % p == 0);
            CHECK(H->symbol(a, -a) == 0);
            const KElem one_minus = KElem::one(K) - a;
            if (!one_minus.is_zero())
                CHECK(H->symbol(a, one_minus) == 0);
            // (a, c^p) = 0: a p-th power is a norm from every Kummer extension
            CHECK(H->symbol(a, b.pow(p)) == 0);
        }
        // the restriction of (zeta, .) to the units is nonzero
        const std::size_t z = *B->zeta_index();
        bool found = false;
        for (std::size_t k = 1; k < n; ++k)
            found = found || H->gram()[z][k] != 0;
        CHECK(found);
        CHECK(hilbert_symbol(B->zeta(), B->basis()[0]) == H->gram()[z][0]);

        // duality
        auto U = subgroup_Ubar(K);
        auto V = subgroup_V(K);
        CHECK(annihilator(U) == V);
        CHECK(annihilator(V) == U);
        std::vector<FpVector> all;
        for (std::size_t i = 0; i < n; ++i) {
            FpVector e(n, 0);
            e[i] = 1;
            all.push_back(e);
        }
        auto W = SubspaceModP::span(B, all);
        auto Z = SubspaceModP::span(B, {});
        CHECK(annihilator(W).dimension() == 0);
        CHECK(annihilator(Z) == W);
        for (int it = 0; it < 20; ++it) {
            std::vector<FpVector> gens;
            const int k = static_cast<int>(rng() % n) + 1;
            for (int g = 0; g < k; ++g) {
                FpVector v(n);
                for (auto& x : v)
                    x = static_cast<long>(rng() % static_cast<unsigned long>(p));
                gens.push_back(v);
            }
            auto S = SubspaceModP::span(B, gens);
            auto A = annihilator(S);
            CHECK(A.dimension() + S.dimension() == n);
            CHECK(annihilator(A) == S);
        }
    }
    CHECK_THROWS_AS(HilbertPairing::of(LocalField::unramified(3, 2)), HypothesisError);
}

TEST_CASE("explicit formula on principal units")
{
    auto K = LocalField::cyclotomic(3, 1);
    auto H = HilbertPairing::of(K);
    auto B = H->units();
    std::mt19937_64 rng(5);
    for (int it = 0; it < 30; ++it) {
        // random principal unit 1 + pi * r
        const KElem u = KElem::one(K) + random_element(K, rng, 0).times_pi(1);
        const FpVector c = B->coordinates(u);
        CHECK(c[0] == 0);
        CHECK(H->pair(B->coordinates(B->zeta()), c) == artin_hasse_zeta_value(u));
    }
    CHECK(artin_hasse_zeta_value(B->zeta()) == 0);
    CHECK_THROWS_AS(artin_hasse_zeta_value(KElem::exact(K, mpz_class(2))), DataError);
}

TEST_CASE("pairing cache under concurrent first use")
{
    auto K = LocalField::cyclotomic(3, 1, 40);
    std::vector<std::shared_ptr<const HilbertPairing>> got(4);
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < got.size(); ++i)
        pool.emplace_back([&, i] { got[i] = HilbertPairing::of(K); });
    for (auto& t : pool)
        t.join();
    for (const auto& g : got)
        CHECK(g == got[0]);
}
