#include <doctest.h>

#include <cft/errors.hpp>
#include <cft/ffield.hpp>

using cft::FiniteField;

TEST_CASE("table multiplication agrees with polynomial multiplication")
{
    for (auto [p, f] : {std::pair{3L, 1}, {3L, 2}, {3L, 3}, {5L, 2}, {7L, 1}}) {
        FiniteField k(p, f);
        CHECK(k.q() == [&] { long q = 1; for (int i = 0; i < f; ++i) q *= p; return q; }());
        for (FiniteField::Elem a = 0; a < k.q(); ++a)
            for (FiniteField::Elem b = 0; b < k.q(); ++b)
                REQUIRE(k.mul(a, b) == k.mul_reference(a, b));
    }
}

TEST_CASE("inverses, square roots and Frobenius inverse")
{
    FiniteField k(3, 2);
    for (FiniteField::Elem a = 1; a < k.q(); ++a) {
        CHECK(k.mul(a, k.inv(a)) == 1);
        auto b = k.frobenius_inverse(a);
        CHECK(k.pow(b, 3) == a);
        if (auto s = k.sqrt(a))
            CHECK(k.mul(*s, *s) == a);
    }
    // exactly half of the nonzero elements are squares for odd q
    long squares = 0;
    for (FiniteField::Elem a = 1; a < k.q(); ++a)
        squares += k.is_square(a);
    CHECK(squares == (k.q() - 1) / 2);
    CHECK_THROWS_AS(k.inv(0), cft::DataError);
}

TEST_CASE("additive structure")
{
    FiniteField k(5, 2);
    for (FiniteField::Elem a = 0; a < k.q(); ++a) {
        CHECK(k.add(a, k.neg(a)) == 0);
        for (FiniteField::Elem b = 0; b < k.q(); b += 3) {
            auto ca = k.coeffs(a), cb = k.coeffs(b), cs = k.coeffs(k.add(a, b));
            for (int j = 0; j < 2; ++j)
                CHECK(cs[j] == (ca[j] + cb[j]) % 5);
        }
    }
}

TEST_CASE("irreducibility over F_p")
{
    // number of monic irreducible quadratics over F_p is (p^2 - p)/2
    for (long p : {3L, 5L, 7L}) {
        long count = 0;
        for (long a = 0; a < p; ++a)
            for (long b = 0; b < p; ++b)
                count += cft::is_irreducible_mod_p({a, b, 1}, p);
        CHECK(count == (p * p - p) / 2);
    }
    CHECK_THROWS_AS(FiniteField(3, std::vector<long>{2, 0, 1}), cft::DataError);  // x^2 + 2 = (x-1)(x+1)
    CHECK_NOTHROW(FiniteField(3, std::vector<long>{1, 0, 1}));                   // x^2 + 1
}
