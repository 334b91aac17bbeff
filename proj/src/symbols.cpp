#include <cft/symbols.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <random>

namespace cft {

namespace {

long modp(long x, long p)
{
    x %= p;
    return x < 0 ? x + p : x;
}

long inv_modp(long a, long p)
{
    long r = 1, b = modp(a, p);
    for (long k = p - 2; k > 0; k >>= 1) {
        if (k & 1)
            r = r * b % p;
        b = b * b % p;
    }
    return r;
}

// One immutable object per field, built at most once even under concurrent
// first use. The cache keeps the field alive.
template <class T, class Build>
std::shared_ptr<const T> per_field(const FieldPtr& K, Build build)
{
    struct Entry {
        FieldPtr field;
        std::once_flag once;
        std::shared_ptr<const T> value;
    };
    static std::mutex mu;
    static std::map<const LocalField*, std::shared_ptr<Entry>> cache;
    std::shared_ptr<Entry> entry;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[K.get()];
        if (!slot) {
            slot = std::make_shared<Entry>();
            slot->field = K;
        }
        entry = slot;
    }
    std::call_once(entry->once, [&] { entry->value = build(); });
    return entry->value;
}

KElem one_plus(const FieldPtr& K, FiniteField::Elem theta, long level)
{
    return KElem::one(K) + KElem::lift(K, theta).times_pi(level);
}

// Phi_{p^m}(x) = sum_{k < p} x^{k p^{m-1}}
std::vector<mpz_class> cyclotomic_poly(long p, int m)
{
    long step = 1;
    for (int i = 1; i < m; ++i)
        step *= p;
    std::vector<mpz_class> c(static_cast<std::size_t>(step * (p - 1) + 1), 0);
    for (long k = 0; k < p; ++k)
        c[static_cast<std::size_t>(k * step)] = 1;
    return c;
}

}  // namespace

// ---------------------------------------------------------------- F_p algebra

std::vector<FpVector> fp_echelon(std::vector<FpVector> rows, long p)
{
    for (auto& r : rows)
        for (auto& x : r)
            x = modp(x, p);
    const std::size_t ncols = rows.empty() ? 0 : rows.front().size();
    std::size_t rank = 0;
    for (std::size_t c = 0; c < ncols && rank < rows.size(); ++c) {
        std::size_t piv = rank;
        while (piv < rows.size() && rows[piv][c] == 0)
            ++piv;
        if (piv == rows.size())
            continue;
        std::swap(rows[rank], rows[piv]);
        const long s = inv_modp(rows[rank][c], p);
        for (auto& x : rows[rank])
            x = x * s % p;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][c] == 0)
                continue;
            const long f = rows[r][c];
            for (std::size_t k = 0; k < ncols; ++k)
                rows[r][k] = modp(rows[r][k] - f * rows[rank][k], p);
        }
        ++rank;
    }
    rows.resize(rank);
    return rows;
}

std::size_t fp_rank(const std::vector<FpVector>& rows, long p) { return fp_echelon(rows, p).size(); }

std::vector<FpVector> fp_nullspace(const std::vector<FpVector>& rows, std::size_t ncols, long p)
{
    const auto R = fp_echelon(rows, p);
    std::vector<std::size_t> pivot_col;
    std::vector<bool> is_pivot(ncols, false);
    for (const auto& r : R) {
        std::size_t c = 0;
        while (r[c] == 0)
            ++c;
        pivot_col.push_back(c);
        is_pivot[c] = true;
    }
    std::vector<FpVector> out;
    for (std::size_t free = 0; free < ncols; ++free) {
        if (is_pivot[free])
            continue;
        FpVector v(ncols, 0);
        v[free] = 1;
        for (std::size_t i = 0; i < R.size(); ++i)
            v[pivot_col[i]] = modp(-R[i][free], p);
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

// inverse of a square matrix over F_p; IntegrityError when singular
std::vector<FpVector> fp_inverse(const std::vector<FpVector>& A, long p)
{
    const std::size_t n = A.size();
    std::vector<FpVector> aug(n, FpVector(2 * n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            aug[i][j] = A[i][j];
        aug[i][n + i] = 1;
    }
    auto R = fp_echelon(aug, p);
    if (R.size() != n || R.back()[n - 1] != 1)
        throw IntegrityError("singular change of basis over F_p");
    std::vector<FpVector> inv(n, FpVector(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            inv[i][j] = R[i][n + j];
    return inv;
}

}  // namespace

// ---------------------------------------------------------------- UnitsModP

std::shared_ptr<const UnitsModP> UnitsModP::of(const FieldPtr& K)
{
    return per_field<UnitsModP>(K, [&] { return std::make_shared<const UnitsModP>(K); });
}

UnitsModP::UnitsModP(FieldPtr K) : K_(std::move(K))
{
    const long p = K_->p();
    if (p == 2)
        throw DataError("p = 2 is not supported");
    const long e = K_->e();
    const FiniteField& k = K_->residue_field();
    const int f = k.degree();
    top_ = p * e / (p - 1);
    p_over_pi_e_ = KElem::exact(K_, mpz_class(p)).times_pi(-e).residue();

    std::vector<FiniteField::Elem> tbasis;
    for (int j = 0; j < f; ++j) {
        std::vector<long> c(static_cast<std::size_t>(f), 0);
        c[static_cast<std::size_t>(j)] = 1;
        tbasis.push_back(k.from_coeffs(c));
    }
    for (long i = 1; i <= top_; ++i)
        if (i % p != 0 && i * (p - 1) < p * e)
            for (auto th : tbasis)
                steps_.push_back({i, th});

    if (top_ * (p - 1) == p * e) {
        // cokernel of d -> d^p + (p/pi^e) d on the residue field
        std::vector<bool> in_span(static_cast<std::size_t>(k.q()), false);
        for (long d = 0; d < k.q(); ++d) {
            const auto de = static_cast<FiniteField::Elem>(d);
            in_span[k.add(k.pow(de, static_cast<std::uint64_t>(p)), k.mul(p_over_pi_e_, de))] = true;
        }
        for (long c = 0; c < k.q(); ++c) {
            if (in_span[static_cast<std::size_t>(c)])
                continue;
            const auto ce = static_cast<FiniteField::Elem>(c);
            star_.push_back(ce);
            std::vector<bool> grown = in_span;
            for (long x = 0; x < k.q(); ++x) {
                if (!in_span[static_cast<std::size_t>(x)])
                    continue;
                FiniteField::Elem y = static_cast<FiniteField::Elem>(x);
                for (long m = 1; m < p; ++m) {
                    y = k.add(y, ce);
                    grown[y] = true;
                }
            }
            in_span = std::move(grown);
        }
    }

    // filtration basis
    std::vector<KElem> fil;
    std::vector<std::string> fil_labels;
    for (const auto& st : steps_) {
        fil.push_back(one_plus(K_, st.theta, st.level));
        fil_labels.push_back("1+[" + std::to_string(st.theta) + "]pi^" + std::to_string(st.level));
    }
    for (auto c : star_) {
        fil.push_back(one_plus(K_, c, top_));
        fil_labels.push_back("1+[" + std::to_string(c) + "]pi^" + std::to_string(top_) + "*");
    }
    const std::size_t nF = fil.size();

    // roots of unity of p-power order
    if (auto M = K_->cyclotomic_level()) {
        s_ = *M;
        zeta_ = KElem::one(K_) + KElem::pi_power(K_, 1, K_->precision_cap());
    } else {
        for (int m = 1;; ++m) {
            long phi = p - 1;
            for (int i = 1; i < m; ++i)
                phi *= p;
            if (phi > K_->degree())
                break;
            auto roots = with_precision_retry(*K_, [&](long prec) {
                return hensel_roots(KPoly::from_integers(K_, cyclotomic_poly(p, m), prec));
            });
            if (roots.empty())
                break;
            s_ = m;
            zeta_ = roots.front();
        }
    }

    // unit basis: zeta replaces the first filtration vector it involves
    std::vector<FpVector> T;
    for (std::size_t i = 0; i < nF; ++i) {
        FpVector r(nF, 0);
        r[i] = 1;
        T.push_back(r);
    }
    std::vector<std::size_t> order(nF);
    for (std::size_t i = 0; i < nF; ++i)
        order[i] = i;
    std::vector<KElem> units = fil;
    std::vector<std::string> unit_labels = fil_labels;
    if (s_ >= 1) {
        const FpVector z = filtration_coordinates(zeta_);
        auto it = std::find_if(z.begin(), z.end(), [](long c) { return c != 0; });
        if (it == z.end())
            throw IntegrityError("root of unity has trivial class in K^x/p");
        const std::size_t j = static_cast<std::size_t>(it - z.begin());
        T[j] = z;
        units[j] = zeta_;
        unit_labels[j] = "zeta_" + std::to_string(p) + "^" + std::to_string(s_);
        order.erase(order.begin() + static_cast<long>(j));
        order.insert(order.begin(), j);
    }
    std::vector<FpVector> T_ordered;
    basis_.push_back(KElem::pi_power(K_, 1, K_->precision_cap()));
    labels_.push_back("pi");
    for (auto i : order) {
        T_ordered.push_back(T[i]);
        basis_.push_back(units[i]);
        labels_.push_back(unit_labels[i]);
    }
    inverse_transition_ = fp_inverse(T_ordered, p);

    const std::size_t expected = static_cast<std::size_t>(K_->degree()) + 1 + (s_ >= 1 ? 1 : 0);
    if (basis_.size() != expected)
        throw IntegrityError("K^x/p has dimension " + std::to_string(basis_.size()) + ", expected " +
                             std::to_string(expected));
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        FpVector unit(basis_.size(), 0);
        unit[i] = 1;
        if (coordinates(basis_[i]) != unit)
            throw IntegrityError("basis coordinate round trip failed at " + labels_[i]);
    }
}

const KElem& UnitsModP::zeta() const
{
    if (s_ < 1)
        throw HypothesisError("mu_p is not contained in " + K_->describe());
    return zeta_;
}

FpVector UnitsModP::filtration_coordinates(KElem u) const
{
    const long p = K_->p();
    const long e = K_->e();
    const FiniteField& k = K_->residue_field();
    FpVector c(steps_.size() + star_.size(), 0);
    long last = 0;
    const KElem one = KElem::one(K_);
    for (;;) {
        const KElem x = u - one;
        if (x.is_zero()) {
            if (x.abs_precision() <= top_)
                throw PrecisionError("principal unit known only to pi^" + std::to_string(x.abs_precision()));
            break;
        }
        const long i = x.valuation();
        if (i <= last)
            throw IntegrityError("unit filtration step did not advance");
        if (i > top_)
            break;
        last = i;
        const FiniteField::Elem r = x.times_pi(-i).residue();
        if (i * (p - 1) < p * e && i % p != 0) {
            const auto cs = k.coeffs(r);
            for (std::size_t s = 0; s < steps_.size(); ++s) {
                if (steps_[s].level != i)
                    continue;
                const auto tc = k.coeffs(steps_[s].theta);
                const std::size_t j = static_cast<std::size_t>(std::find(tc.begin(), tc.end(), 1) - tc.begin());
                const long cj = modp(cs[j], p);
                c[s] = cj;
                if (cj)
                    u = u * one_plus(K_, steps_[s].theta, i).pow(-cj);
            }
        } else if (i * (p - 1) < p * e) {
            const KElem w = one_plus(K_, k.frobenius_inverse(r), i / p);
            u = u / w.pow(p);
        } else {
            // level p e0: r = d^p + (p/pi^e) d + sum t_j star_j
            bool done = false;
            const std::size_t ns = star_.size();
            std::vector<long> t(ns, 0);
            long combos = 1;
            for (std::size_t j = 0; j < ns; ++j)
                combos *= p;
            for (long code = 0; code < combos && !done; ++code) {
                long rest = code;
                FiniteField::Elem target = r;
                for (std::size_t j = 0; j < ns; ++j) {
                    t[j] = rest % p;
                    rest /= p;
                    for (long m = 0; m < t[j]; ++m)
                        target = k.sub(target, star_[j]);
                }
                for (long d = 0; d < k.q(); ++d) {
                    const auto de = static_cast<FiniteField::Elem>(d);
                    if (k.add(k.pow(de, static_cast<std::uint64_t>(p)), k.mul(p_over_pi_e_, de)) != target)
                        continue;
                    u = u / one_plus(K_, de, i / p).pow(p);
                    for (std::size_t j = 0; j < ns; ++j) {
                        c[steps_.size() + j] = t[j];
                        if (t[j])
                            u = u * one_plus(K_, star_[j], i).pow(-t[j]);
                    }
                    done = true;
                    break;
                }
            }
            if (!done)
                throw IntegrityError("no decomposition at the critical filtration level");
        }
    }
    return c;
}

FpVector UnitsModP::coordinates(const KElem& a, bool certify) const
{
    if (a.field() != K_)
        throw DataError("element belongs to a different field");
    if (a.is_zero())
        throw DataError("coordinates of zero (or an element zero to precision)");
    const long p = K_->p();
    const long v = a.valuation();
    const KElem u = a.times_pi(-v);
    // u^(q-1) is principal and has class (q-1) [u] = -[u]
    const long q1 = K_->residue_field().q() - 1;
    FpVector cf = filtration_coordinates(u.pow(q1));
    for (auto& x : cf)
        x = modp(-x, p);
    FpVector out(basis_.size(), 0);
    out[0] = modp(v, p);
    for (std::size_t j = 0; j < cf.size(); ++j) {
        long acc = 0;
        for (std::size_t i = 0; i < cf.size(); ++i)
            acc += cf[i] * inverse_transition_[i][j];
        out[j + 1] = modp(acc, p);
    }
    if (certify) {
        KElem rest = a;
        for (std::size_t i = 0; i < basis_.size(); ++i)
            if (out[i])
                rest = rest / basis_[i].pow(out[i]);
        if (!is_pth_power(rest))
            throw PrecisionError("coordinate certificate failed: quotient is not a p-th power");
    }
    return out;
}

// ---------------------------------------------------------------- subspaces

SubspaceModP SubspaceModP::span(std::shared_ptr<const UnitsModP> parent, std::vector<FpVector> vectors)
{
    SubspaceModP s;
    const long p = parent->p();
    s.parent = std::move(parent);
    s.basis = fp_echelon(std::move(vectors), p);
    return s;
}

bool SubspaceModP::contains(const FpVector& v) const
{
    auto rows = basis;
    rows.push_back(v);
    return fp_rank(rows, parent->p()) == basis.size();
}

SubspaceModP subgroup_Ubar(const FieldPtr& K)
{
    auto B = UnitsModP::of(K);
    std::vector<FpVector> vs;
    for (std::size_t i = 1; i < B->dimension(); ++i) {
        FpVector v(B->dimension(), 0);
        v[i] = 1;
        vs.push_back(std::move(v));
    }
    return SubspaceModP::span(B, std::move(vs));
}

SubspaceModP subgroup_V(const FieldPtr& K)
{
    auto e0 = K->e0();
    if (!e0)
        throw HypothesisError("e0 = e/(p-1) is not an integer for " + K->describe());
    auto B = UnitsModP::of(K);
    const FiniteField& k = K->residue_field();
    std::vector<FpVector> vs;
    for (int j = 0; j < k.degree(); ++j) {
        std::vector<long> c(static_cast<std::size_t>(k.degree()), 0);
        c[static_cast<std::size_t>(j)] = 1;
        vs.push_back(B->coordinates(one_plus(K, k.from_coeffs(c), K->p() * *e0)));
    }
    return SubspaceModP::span(B, std::move(vs));
}

// ---------------------------------------------------------------- pairing

long artin_hasse_zeta_value(const KElem& b)
{
    const FieldPtr& K = b.field();
    const auto M = K->cyclotomic_level();
    if (!M)
        throw HypothesisError("the explicit formula needs a cyclotomic field");
    if (b.is_zero() || b.valuation() != 0 || b.residue() != 1)
        throw DataError("the explicit formula takes a principal unit");
    const KElem tr = trace_norm_to_base(plog(b)).trace;
    const long p = K->p();
    if (tr.is_zero()) {
        if (tr.abs_precision() <= *M)
            throw PrecisionError("trace of the logarithm lost its precision");
        return 0;
    }
    if (tr.valuation() < *M)
        throw IntegrityError("trace of a logarithm is not divisible by p^M");
    const mpz_class v = tr.times_pi(-*M).to_mpz();
    return mpz_class(v % p).get_si();
}

std::shared_ptr<const HilbertPairing> HilbertPairing::of(const FieldPtr& K)
{
    if (!K->cyclotomic_level())
        throw HypothesisError("Hilbert pairing is only provided on Q_p(mu_{p^M})");
    return per_field<HilbertPairing>(K, [&] { return std::make_shared<const HilbertPairing>(K, 20240917u); });
}

HilbertPairing::HilbertPairing(FieldPtr K, unsigned seed) : units_(UnitsModP::of(K))
{
    const long p = K->p();
    const std::size_t n = units_->dimension();
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            slots.emplace_back(i, j);
    const std::size_t m = slots.size();

    std::mt19937_64 rng(seed);
    const long prec = K->precision();
    auto random_integral = [&] {
        Integral c = K->int_zero();
        mpz_class bound;
        mpz_ui_pow_ui(bound.get_mpz_t(), static_cast<unsigned long>(p), 12);
        for (auto& x : c)
            x = mpz_class(static_cast<unsigned long>(rng() % bound.get_ui()));
        return KElem::from_integral(K, c, prec);
    };

    std::vector<FpVector> rows;
    std::size_t rank = 0, confirmations = 0;
    const std::size_t wanted_confirmations = 2 * m + 10;
    for (std::size_t attempt = 0; attempt < 50 * m + 200; ++attempt) {
        KElem a = random_integral();
        if (a.is_zero())
            continue;
        switch (rng() % 3) {
        case 0:
            a = a.times_pi(static_cast<long>(rng() % 5) - 2);
            break;
        case 1:
            a = KElem::one(K) - a.times_pi(static_cast<long>(rng() % 4) + 1);
            break;
        default:
            break;
        }
        const KElem b = KElem::one(K) - a;
        if (a.is_zero() || b.is_zero())
            continue;
        const FpVector x = units_->coordinates(a, false);
        const FpVector y = units_->coordinates(b, false);
        FpVector row(m);
        for (std::size_t s = 0; s < m; ++s) {
            const auto [i, j] = slots[s];
            row[s] = modp(x[i] * y[j] - x[j] * y[i], p);
        }
        ++relations_;
        rows.push_back(std::move(row));
        rows = fp_echelon(std::move(rows), p);
        if (rows.size() == m)
            throw IntegrityError("Steinberg relations admit no nonzero alternating form");
        if (rows.size() > rank) {
            rank = rows.size();
            confirmations = 0;
        } else if (rank + 1 == m && ++confirmations >= wanted_confirmations) {
            break;
        }
    }
    if (rank + 1 != m || confirmations < wanted_confirmations)
        throw IntegrityError("Steinberg relations did not pin down the pairing");

    const FpVector g0 = fp_nullspace(rows, m, p).front();
    std::vector<FpVector> G(n, FpVector(n, 0));
    for (std::size_t s = 0; s < m; ++s) {
        const auto [i, j] = slots[s];
        G[i][j] = g0[s];
        G[j][i] = modp(-g0[s], p);
    }

    // fix the scalar by the explicit formula on (zeta, unit basis vector)
    const std::size_t z = *units_->zeta_index();
    std::vector<long> ah(n, 0);
    for (std::size_t k = 1; k < n; ++k)
        ah[k] = artin_hasse_zeta_value(units_->basis()[k]);
    long scale = 0;
    for (std::size_t k = 1; k < n && !scale; ++k)
        if (G[z][k])
            scale = ah[k] * inv_modp(G[z][k], p) % p;
    if (scale == 0)
        throw IntegrityError("explicit formula and Steinberg solution disagree on (zeta, U)");
    for (auto& r : G)
        for (auto& g : r)
            g = g * scale % p;
    for (std::size_t k = 1; k < n; ++k)
        if (G[z][k] != ah[k])
            throw IntegrityError("explicit formula and Steinberg solution disagree at " +
                                 units_->labels()[k]);
    gram_ = std::move(G);
}

long HilbertPairing::pair(const FpVector& a, const FpVector& b) const
{
    const long p = units_->p();
    long acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i])
            continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            acc = (acc + a[i] * gram_[i][j] % p * b[j]) % p;
    }
    return acc;
}

long HilbertPairing::symbol(const KElem& a, const KElem& b) const
{
    return pair(units_->coordinates(a), units_->coordinates(b));
}

long hilbert_symbol(const KElem& a, const KElem& b)
{
    if (a.field() != b.field())
        throw DataError("symbol arguments live in different fields");
    return HilbertPairing::of(a.field())->symbol(a, b);
}

SubspaceModP annihilator(const SubspaceModP& S)
{
    auto H = HilbertPairing::of(S.parent->field());
    if (H->units() != S.parent)
        throw DataError("subspace is expressed in a different basis");
    const long p = S.parent->p();
    const std::size_t n = S.parent->dimension();
    std::vector<FpVector> rows;
    for (const auto& s : S.basis) {
        FpVector r(n, 0);
        for (std::size_t j = 0; j < n; ++j) {
            long acc = 0;
            for (std::size_t i = 0; i < n; ++i)
                acc += s[i] * H->gram()[i][j];
            r[j] = modp(acc, p);
        }
        rows.push_back(std::move(r));
    }
    return SubspaceModP::span(S.parent, fp_nullspace(rows, n, p));
}

}  // namespace cft
