#include "cft/ffield.hpp"

#include <cft/errors.hpp>

#include <string>

namespace cft {

namespace {

long mod(long a, long p)
{
    a %= p;
    return a < 0 ? a + p : a;
}

// Remainder of a modulo a monic b over F_p; both low to high.
std::vector<long> poly_rem(std::vector<long> a, const std::vector<long>& b, long p)
{
    const std::size_t db = b.size() - 1;
    while (a.size() > db) {
        long lead = mod(a.back(), p);
        std::size_t shift = a.size() - 1 - db;
        for (std::size_t i = 0; i <= db; ++i)
            a[shift + i] = mod(a[shift + i] - lead * b[i], p);
        a.pop_back();
    }
    while (!a.empty() && a.back() == 0)
        a.pop_back();
    return a;
}

bool next_monic(std::vector<long>& poly, long p)
{
    // increments non-leading coefficients like an odometer
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        if (++poly[i] < p)
            return true;
        poly[i] = 0;
    }
    return false;
}

}  // namespace

bool is_irreducible_mod_p(const std::vector<long>& poly, long p)
{
    const int f = static_cast<int>(poly.size()) - 1;
    if (f < 1 || mod(poly.back(), p) != 1)
        return false;
    if (f == 1)
        return true;
    for (int d = 1; 2 * d <= f; ++d) {
        std::vector<long> cand(d + 1, 0);
        cand[d] = 1;
        do {
            if (poly_rem(poly, cand, p).empty())
                return false;
        } while (next_monic(cand, p));
    }
    return true;
}

FiniteField::FiniteField(long p, int f) : p_(p), f_(f)
{
    if (p < 2 || f < 1)
        throw DataError("finite field needs a prime p and degree f >= 1");
    std::vector<long> cand(f + 1, 0);
    cand[f] = 1;
    do {
        if (is_irreducible_mod_p(cand, p)) {
            modulus_ = cand;
            build();
            return;
        }
    } while (next_monic(cand, p));
    throw DataError("no irreducible polynomial found");
}

FiniteField::FiniteField(long p, std::vector<long> modulus)
    : p_(p), f_(static_cast<int>(modulus.size()) - 1), modulus_(std::move(modulus))
{
    for (auto& c : modulus_)
        c = mod(c, p_);
    if (!is_irreducible_mod_p(modulus_, p_))
        throw DataError("finite field modulus is not irreducible mod " + std::to_string(p_));
    build();
}

void FiniteField::build()
{
    q_ = 1;
    for (int i = 0; i < f_; ++i) {
        q_ *= p_;
        if (q_ > kMaxOrder)
            throw DataError("finite field too large for table arithmetic");
    }
    log_.assign(q_, 0);
    exp_.assign(q_ - 1, 0);
    for (Elem g = 1; g < static_cast<Elem>(q_); ++g) {
        Elem x = 1;
        bool ok = true;
        for (long i = 0; i < q_ - 1; ++i) {
            exp_[i] = x;
            x = mul_reference(x, g);
            if (x == 1 && i + 1 < q_ - 1) {
                ok = false;
                break;
            }
        }
        if (ok) {
            primitive_ = g;
            break;
        }
    }
    for (long i = 0; i < q_ - 1; ++i)
        log_[exp_[i]] = static_cast<std::uint32_t>(i);
    sqrt_.assign(q_, kNone);
    for (Elem y = 0; y < static_cast<Elem>(q_); ++y) {
        Elem s = mul(y, y);
        if (sqrt_[s] == kNone)
            sqrt_[s] = y;
    }
}

FiniteField::Elem FiniteField::from_int(long v) const
{
    return static_cast<Elem>(mod(v, p_));
}

FiniteField::Elem FiniteField::from_coeffs(std::span<const long> c) const
{
    Elem r = 0, scale = 1;
    for (int j = 0; j < f_; ++j) {
        long cj = j < static_cast<int>(c.size()) ? mod(c[j], p_) : 0;
        r += static_cast<Elem>(cj) * scale;
        scale *= static_cast<Elem>(p_);
    }
    return r;
}

std::vector<long> FiniteField::coeffs(Elem a) const
{
    std::vector<long> c(f_);
    for (int j = 0; j < f_; ++j) {
        c[j] = static_cast<long>(a % p_);
        a /= static_cast<Elem>(p_);
    }
    return c;
}

FiniteField::Elem FiniteField::add(Elem a, Elem b) const
{
    if (f_ == 1)
        return static_cast<Elem>((a + b) % p_);
    Elem r = 0, scale = 1;
    while (a || b) {
        Elem d = static_cast<Elem>((a % p_ + b % p_) % p_);
        r += d * scale;
        scale *= static_cast<Elem>(p_);
        a /= static_cast<Elem>(p_);
        b /= static_cast<Elem>(p_);
    }
    return r;
}

FiniteField::Elem FiniteField::neg(Elem a) const
{
    if (f_ == 1)
        return a ? static_cast<Elem>(p_ - a) : 0;
    Elem r = 0, scale = 1;
    while (a) {
        Elem d = a % p_;
        r += (d ? static_cast<Elem>(p_) - d : 0) * scale;
        scale *= static_cast<Elem>(p_);
        a /= static_cast<Elem>(p_);
    }
    return r;
}

FiniteField::Elem FiniteField::sub(Elem a, Elem b) const
{
    return add(a, neg(b));
}

FiniteField::Elem FiniteField::mul(Elem a, Elem b) const
{
    if (a == 0 || b == 0)
        return 0;
    return exp_[(log_[a] + log_[b]) % (q_ - 1)];
}

FiniteField::Elem FiniteField::inv(Elem a) const
{
    if (a == 0)
        throw DataError("inverse of zero in finite field");
    return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
}

FiniteField::Elem FiniteField::pow(Elem a, std::uint64_t k) const
{
    if (k == 0)
        return 1;
    if (a == 0)
        return 0;
    return exp_[static_cast<std::uint64_t>(log_[a]) * (k % (q_ - 1)) % (q_ - 1)];
}

std::optional<FiniteField::Elem> FiniteField::sqrt(Elem a) const
{
    if (sqrt_[a] == kNone)
        return std::nullopt;
    return sqrt_[a];
}

FiniteField::Elem FiniteField::frobenius_inverse(Elem a) const
{
    // x^(q/p) inverts x -> x^p on F_q
    return pow(a, static_cast<std::uint64_t>(q_ / p_));
}

FiniteField::Elem FiniteField::mul_reference(Elem a, Elem b) const
{
    auto ca = coeffs(a), cb = coeffs(b);
    std::vector<long> prod(2 * f_ - 1, 0);
    for (int i = 0; i < f_; ++i)
        for (int j = 0; j < f_; ++j)
            prod[i + j] = mod(prod[i + j] + ca[i] * cb[j], p_);
    auto r = poly_rem(prod, modulus_, p_);
    return from_coeffs(r);
}

}  // namespace cft
