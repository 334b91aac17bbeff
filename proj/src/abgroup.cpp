#include "cft/abgroup.hpp"

#include <cft/errors.hpp>

#include <algorithm>
#include <map>
#include <numeric>

namespace cft {

namespace {

long checked_mul(long a, long b)
{
    long r;
    if (__builtin_mul_overflow(a, b, &r))
        throw DataError("group invariant overflows 64 bits");
    return r;
}

}  // namespace

AbGroup AbGroup::from_cyclic(const std::vector<long>& orders)
{
    // prime -> exponents of the prime-power components
    std::map<long, std::vector<long>> parts;
    for (long n : orders) {
        if (n < 1)
            throw DataError("cyclic factor of order < 1");
        for (long q = 2; q * q <= n; ++q) {
            if (n % q)
                continue;
            long pk = 1;
            while (n % q == 0) {
                n /= q;
                pk *= q;
            }
            parts[q].push_back(pk);
        }
        if (n > 1)
            parts[n].push_back(n);
    }
    std::size_t r = 0;
    for (auto& [q, v] : parts) {
        std::sort(v.begin(), v.end(), std::greater<>());
        r = std::max(r, v.size());
    }
    // d_r collects the largest power of each prime, d_{r-1} the next, ...
    std::vector<long> d(r, 1);
    for (const auto& [q, v] : parts)
        for (std::size_t i = 0; i < v.size(); ++i)
            d[r - 1 - i] = checked_mul(d[r - 1 - i], v[i]);
    AbGroup g;
    for (long x : d)
        if (x > 1)
            g.d_.push_back(x);
    return g;
}

AbGroup AbGroup::power(long n, long k)
{
    if (k < 0)
        throw DataError("negative multiplicity");
    return from_cyclic(std::vector<long>(static_cast<std::size_t>(k), n));
}

mpz_class AbGroup::order() const
{
    mpz_class r = 1;
    for (long x : d_)
        r *= x;
    return r;
}

long AbGroup::p_rank(long p) const
{
    return std::count_if(d_.begin(), d_.end(), [p](long x) { return x % p == 0; });
}

AbGroup AbGroup::operator+(const AbGroup& other) const
{
    std::vector<long> all = d_;
    all.insert(all.end(), other.d_.begin(), other.d_.end());
    return from_cyclic(all);
}

AbGroup AbGroup::quotient(long m) const
{
    if (m < 1)
        throw DataError("quotient by a non-positive integer");
    std::vector<long> v;
    for (long x : d_)
        v.push_back(std::gcd(x, m));
    return from_cyclic(v);
}

AbGroup AbGroup::torsion(long m) const
{
    // Z/d[m] and Z/d / m are both cyclic of order gcd(d, m)
    return quotient(m);
}

AbGroup AbGroup::p_part(long p) const
{
    std::vector<long> v;
    for (long x : d_) {
        long pk = 1;
        while (x % p == 0) {
            x /= p;
            pk *= p;
        }
        v.push_back(pk);
    }
    return from_cyclic(v);
}

std::string AbGroup::to_string() const
{
    if (d_.empty())
        return "0";
    std::string s;
    for (std::size_t i = 0; i < d_.size(); ++i) {
        if (i)
            s += " + ";
        s += "Z/" + std::to_string(d_[i]);
    }
    return s;
}

}  // namespace cft
