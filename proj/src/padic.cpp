#include "cft/padic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cft {

namespace {

long vp_mpz(const mpz_class& z, long p, long cap)
{
    if (z == 0)
        return cap;
    long v = 0;
    mpz_class t = z;
    while (v < cap && mpz_divisible_ui_p(t.get_mpz_t(), static_cast<unsigned long>(p))) {
        mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(p));
        ++v;
    }
    return v;
}

long ceil_div(long a, long b)
{
    // b > 0
    return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

mpz_class binomial(long n, long k)
{
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

// Exact determinant by fraction-free elimination.
mpz_class bareiss_det(std::vector<std::vector<mpz_class>> m)
{
    const std::size_t n = m.size();
    if (n == 0)
        return 1;
    mpz_class prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < n && m[r][k] == 0)
                ++r;
            if (r == n)
                return 0;
            std::swap(m[k], m[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                mpz_class t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                m[i][j] = t;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    mpz_class d = m[n - 1][n - 1];
    return sign > 0 ? d : mpz_class(-d);
}

}  // namespace

// ---------------------------------------------------------------------------
// LocalField

LocalField::LocalField(long p, std::vector<long> modulus, std::vector<std::vector<mpz_class>> eis,
                       int precision)
    : p_(p), f_(0), e_(0), precision_(precision), storage_digits_(0),
      residue_(p, std::move(modulus)), eis_(std::move(eis))
{
    init();
}

FieldPtr LocalField::make(long p, std::vector<long> unramified_modulus,
                          std::vector<std::vector<mpz_class>> eisenstein, int precision)
{
    if (p == 2)
        throw DataError("p = 2 is not supported");
    if (p < 3 || mpz_probab_prime_p(mpz_class(p).get_mpz_t(), 25) == 0)
        throw DataError("p must be an odd prime");
    if (precision < 1)
        throw DataError("precision must be positive");
    if (eisenstein.empty())
        throw DataError("Eisenstein polynomial must have degree >= 1");
    std::shared_ptr<LocalField> k(
        new LocalField(p, std::move(unramified_modulus), std::move(eisenstein), precision));
    if (k->degree() > 1)
        k->base_ = qp(p, precision);
    return k;
}

FieldPtr LocalField::qp(long p, int precision)
{
    return make(p, {0, 1}, {{mpz_class(-p)}}, precision);
}

FieldPtr LocalField::unramified(long p, int f, int precision)
{
    if (p == 2)
        throw DataError("p = 2 is not supported");
    FiniteField k(p, f);
    std::vector<mpz_class> a0(f, 0);
    a0[0] = -p;
    return make(p, k.modulus(), {a0}, precision);
}

FieldPtr LocalField::cyclotomic(long p, int M, int precision)
{
    if (M < 1)
        throw DataError("cyclotomic level must be >= 1");
    long m = 1;
    for (int i = 1; i < M; ++i)
        m *= p;
    const long deg = (p - 1) * m;
    // Phi_{p^M}(1 + x) = sum_{k<p} (1 + x)^{k m}
    std::vector<std::vector<mpz_class>> eis;
    for (long i = 0; i < deg; ++i) {
        mpz_class c = 0;
        for (long k = 0; k < p; ++k)
            if (k * m >= i)
                c += binomial(k * m, i);
        eis.push_back({c});
    }
    auto base = make(p, {0, 1}, std::move(eis), precision);
    auto k = std::const_pointer_cast<LocalField>(base);
    k->cyclotomic_level_ = M;
    return k;
}

void LocalField::init()
{
    f_ = residue_.degree();
    e_ = static_cast<int>(eis_.size());
    g_.assign(residue_.modulus().begin(), residue_.modulus().end());
    for (auto& c : eis_)
        c.resize(f_, 0);
    for (int i = 0; i < e_; ++i)
        for (const auto& c : eis_[i])
            if (!mpz_divisible_ui_p(c.get_mpz_t(), static_cast<unsigned long>(p_)))
                throw DataError("polynomial is not Eisenstein: coefficient not divisible by p");
    {
        std::vector<long> red(f_);
        for (int j = 0; j < f_; ++j) {
            mpz_class t = eis_[0][j] / p_;
            red[j] = mpz_fdiv_ui(t.get_mpz_t(), static_cast<unsigned long>(p_));
        }
        if (residue_.from_coeffs(red) == 0)
            throw DataError("polynomial is not Eisenstein: constant term divisible by p^2");
    }
    storage_digits_ = precision_cap() + 2;
    mpz_ui_pow_ui(pK_.get_mpz_t(), static_cast<unsigned long>(p_),
                  static_cast<unsigned long>(storage_digits_));

    // pi^e = p W with W = -sum (a_j / p) pi^j; then p / pi = pi^(e-1) W^{-1}.
    Integral w = int_zero();
    for (int i = 0; i < e_; ++i)
        for (int j = 0; j < f_; ++j)
            w[i * f_ + j] = -(eis_[i][j] / p_);
    reduce(w);
    Integral top = int_zero();
    top[(e_ - 1) * f_] = 1;
    p_over_pi_ = int_mul(top, int_inverse_unit(w));
}

std::optional<int> LocalField::e0() const
{
    if (e_ % (p_ - 1) != 0)
        return std::nullopt;
    return static_cast<int>(e_ / (p_ - 1));
}

FieldPtr LocalField::base() const
{
    if (degree() == 1)
        return shared_from_this();
    return base_;
}

std::string LocalField::describe() const
{
    std::ostringstream os;
    if (cyclotomic_level_) {
        os << "Q_" << p_ << "(zeta_" << p_;
        if (*cyclotomic_level_ > 1)
            os << "^" << *cyclotomic_level_;
        os << ")";
    } else if (degree() == 1) {
        os << "Q_" << p_;
    } else {
        os << "K/Q_" << p_;
    }
    os << " [e=" << e_ << ", f=" << f_ << ", prec=" << precision_ << "]";
    return os.str();
}

void LocalField::reduce_unr(std::vector<mpz_class>& a) const
{
    for (std::size_t d = a.size(); d-- > static_cast<std::size_t>(f_);) {
        if (a[d] == 0)
            continue;
        mpz_class c = a[d];
        for (int j = 0; j < f_; ++j)
            a[d - f_ + j] -= c * g_[j];
    }
    a.resize(f_);
}

std::vector<mpz_class> LocalField::unr_mul(const std::vector<mpz_class>& a,
                                           const std::vector<mpz_class>& b) const
{
    if (f_ == 1)
        return {a[0] * b[0]};
    std::vector<mpz_class> r(2 * f_ - 1, 0);
    for (int i = 0; i < f_; ++i) {
        if (a[i] == 0)
            continue;
        for (int j = 0; j < f_; ++j)
            r[i + j] += a[i] * b[j];
    }
    reduce_unr(r);
    return r;
}

void LocalField::reduce(Integral& a) const
{
    for (auto& c : a)
        mpz_mod(c.get_mpz_t(), c.get_mpz_t(), pK_.get_mpz_t());
}

Integral LocalField::int_one() const
{
    Integral r = int_zero();
    r[0] = 1;
    return r;
}

Integral LocalField::int_from_mpz(const mpz_class& z) const
{
    Integral r = int_zero();
    r[0] = z;
    reduce(r);
    return r;
}

Integral LocalField::int_add(const Integral& a, const Integral& b) const
{
    Integral r(dim());
    for (std::size_t i = 0; i < dim(); ++i)
        r[i] = a[i] + b[i];
    reduce(r);
    return r;
}

Integral LocalField::int_neg(const Integral& a) const
{
    Integral r(dim());
    for (std::size_t i = 0; i < dim(); ++i)
        r[i] = -a[i];
    reduce(r);
    return r;
}

Integral LocalField::int_mul(const Integral& a, const Integral& b) const
{
    const int n = 2 * e_ - 1;
    std::vector<std::vector<mpz_class>> prod(n, std::vector<mpz_class>(f_, 0));
    std::vector<std::vector<mpz_class>> ab(e_), bb(e_);
    std::vector<bool> anz(e_), bnz(e_);
    for (int i = 0; i < e_; ++i) {
        ab[i].assign(a.begin() + i * f_, a.begin() + (i + 1) * f_);
        bb[i].assign(b.begin() + i * f_, b.begin() + (i + 1) * f_);
        anz[i] = std::any_of(ab[i].begin(), ab[i].end(), [](const mpz_class& c) { return c != 0; });
        bnz[i] = std::any_of(bb[i].begin(), bb[i].end(), [](const mpz_class& c) { return c != 0; });
    }
    for (int i = 0; i < e_; ++i) {
        if (!anz[i])
            continue;
        for (int j = 0; j < e_; ++j) {
            if (!bnz[j])
                continue;
            auto t = unr_mul(ab[i], bb[j]);
            for (int k = 0; k < f_; ++k)
                prod[i + j][k] += t[k];
        }
    }
    for (int d = n - 1; d >= e_; --d) {
        auto& c = prod[d];
        if (std::all_of(c.begin(), c.end(), [](const mpz_class& x) { return x == 0; }))
            continue;
        for (auto& x : c)
            mpz_mod(x.get_mpz_t(), x.get_mpz_t(), pK_.get_mpz_t());
        for (int j = 0; j < e_; ++j) {
            auto t = unr_mul(c, eis_[j]);
            for (int k = 0; k < f_; ++k)
                prod[d - e_ + j][k] -= t[k];
        }
    }
    Integral r(dim());
    for (int i = 0; i < e_; ++i)
        for (int k = 0; k < f_; ++k)
            r[i * f_ + k] = prod[i][k];
    reduce(r);
    return r;
}

Integral LocalField::int_mul_pi(Integral a, long k) const
{
    if (k >= static_cast<long>(e_) * storage_digits_)
        return int_zero();
    for (long step = 0; step < k; ++step) {
        std::vector<mpz_class> top(a.end() - f_, a.end());
        for (int i = e_ - 1; i >= 1; --i)
            for (int j = 0; j < f_; ++j)
                a[i * f_ + j] = a[(i - 1) * f_ + j];
        for (int j = 0; j < f_; ++j)
            a[j] = 0;
        if (std::any_of(top.begin(), top.end(), [](const mpz_class& x) { return x != 0; })) {
            for (int i = 0; i < e_; ++i) {
                auto t = unr_mul(top, eis_[i]);
                for (int j = 0; j < f_; ++j)
                    a[i * f_ + j] -= t[j];
            }
        }
        reduce(a);
    }
    return a;
}

Integral LocalField::int_div_pi(Integral a, long k) const
{
    for (long step = 0; step < k; ++step) {
        // a = a_0 + pi * (rest); a_0 in p O_unr, and a_0 / pi = (a_0 / p) * (p / pi)
        std::vector<mpz_class> a0(a.begin(), a.begin() + f_);
        for (auto& c : a0) {
            if (!mpz_divisible_ui_p(c.get_mpz_t(), static_cast<unsigned long>(p_)))
                throw IntegrityError("inexact division by pi");
            mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(p_));
        }
        for (int i = 0; i + 1 < e_; ++i)
            for (int j = 0; j < f_; ++j)
                a[i * f_ + j] = a[(i + 1) * f_ + j];
        for (int j = 0; j < f_; ++j)
            a[(e_ - 1) * f_ + j] = 0;
        if (std::any_of(a0.begin(), a0.end(), [](const mpz_class& x) { return x != 0; })) {
            for (int i = 0; i < e_; ++i) {
                std::vector<mpz_class> qi(p_over_pi_.begin() + i * f_,
                                          p_over_pi_.begin() + (i + 1) * f_);
                auto t = unr_mul(a0, qi);
                for (int j = 0; j < f_; ++j)
                    a[i * f_ + j] += t[j];
            }
        }
        reduce(a);
    }
    return a;
}

long LocalField::int_valuation(const Integral& a, long cap) const
{
    long best = cap;
    for (int i = 0; i < e_ && i < best; ++i) {
        for (int j = 0; j < f_; ++j) {
            const auto& c = a[i * f_ + j];
            if (c == 0)
                continue;
            long limit = (best - i + e_ - 1) / e_;
            long v = vp_mpz(c, p_, limit);
            best = std::min(best, e_ * v + i);
        }
    }
    return best;
}

FiniteField::Elem LocalField::int_residue(const Integral& a) const
{
    std::vector<long> c(f_);
    for (int j = 0; j < f_; ++j)
        c[j] = static_cast<long>(mpz_fdiv_ui(a[j].get_mpz_t(), static_cast<unsigned long>(p_)));
    return residue_.from_coeffs(c);
}

Integral LocalField::int_lift(FiniteField::Elem r) const
{
    Integral out = int_zero();
    auto c = residue_.coeffs(r);
    for (int j = 0; j < f_; ++j)
        out[j] = c[j];
    return out;
}

Integral LocalField::int_inverse_unit(const Integral& u) const
{
    auto r = int_residue(u);
    if (r == 0)
        throw IntegrityError("inverse of a non-unit");
    Integral x = int_lift(residue_.inv(r));
    const Integral one = int_one();
    for (int iter = 0; iter < 128; ++iter) {
        Integral t = int_mul(u, x);
        if (t == one)
            return x;
        // x <- x (2 - u x)
        Integral two_minus = int_neg(t);
        two_minus[0] += 2;
        reduce(two_minus);
        x = int_mul(x, two_minus);
    }
    throw IntegrityError("unit inversion did not converge");
}

std::vector<std::vector<mpz_class>> LocalField::int_mult_matrix(const Integral& a) const
{
    const std::size_t n = dim();
    std::vector<std::vector<mpz_class>> m(n, std::vector<mpz_class>(n));
    for (std::size_t k = 0; k < n; ++k) {
        Integral b = int_zero();
        b[k] = 1;
        auto col = int_mul(a, b);
        for (std::size_t r = 0; r < n; ++r)
            m[r][k] = col[r];
    }
    return m;
}

// ---------------------------------------------------------------------------
// KElem

KElem::KElem(FieldPtr field, Integral unit, long val, long rel)
    : field_(std::move(field)), unit_(std::move(unit)), val_(val), rel_(rel)
{
}

KElem KElem::zero(FieldPtr field, long abs_precision)
{
    return KElem(std::move(field), {}, std::min(abs_precision, kExact), 0);
}

KElem KElem::one(FieldPtr field)
{
    const long cap = field->precision_cap();
    Integral u = field->int_one();
    return KElem(std::move(field), std::move(u), 0, cap);
}

KElem KElem::make_normalized(FieldPtr field, Integral c, long shift, long abs_precision)
{
    const long cap = field->precision_cap();
    const long abs_eff = std::min(abs_precision, shift + cap);
    const long bound = abs_eff - shift;
    if (bound <= 0)
        return zero(std::move(field), abs_eff);
    const long v = field->int_valuation(c, bound);
    if (v >= bound)
        return zero(std::move(field), abs_eff);
    Integral u = field->int_div_pi(std::move(c), v);
    const long val = shift + v;
    return KElem(std::move(field), std::move(u), val, std::min(abs_eff - val, cap));
}

KElem KElem::from_int(FieldPtr field, const mpz_class& z, long abs_precision)
{
    auto c = field->int_from_mpz(z);
    return make_normalized(std::move(field), std::move(c), 0, abs_precision);
}

KElem KElem::from_rational(FieldPtr field, const mpq_class& q, long abs_precision)
{
    mpz_class den = q.get_den();
    if (den == 0)
        throw DataError("zero denominator");
    const long vd = field->e() * vp_mpz(den, field->p(), kExact);
    KElem n = from_int(field, q.get_num(), abs_precision + vd);
    KElem d = from_int(field, den, kExact);
    return n / d;
}

KElem KElem::from_integral(FieldPtr field, const Integral& coeffs, long abs_precision)
{
    Integral c = field->int_zero();
    for (std::size_t i = 0; i < c.size() && i < coeffs.size(); ++i)
        c[i] = coeffs[i];
    for (auto& x : c)
        mpz_mod(x.get_mpz_t(), x.get_mpz_t(), field->storage_modulus().get_mpz_t());
    return make_normalized(std::move(field), std::move(c), 0, abs_precision);
}

KElem KElem::pi_power(FieldPtr field, long k, long rel_precision)
{
    const long cap = field->precision_cap();
    Integral u = field->int_one();
    return KElem(std::move(field), std::move(u), k, std::clamp(rel_precision, 1L, cap));
}

KElem KElem::lift(FieldPtr field, FiniteField::Elem r, long abs_precision)
{
    auto c = field->int_lift(r);
    return make_normalized(std::move(field), std::move(c), 0, abs_precision);
}

void KElem::check_same_field(const KElem& b) const
{
    if (!field_ || !b.field_)
        throw DataError("operation on an uninitialised element");
    if (field_.get() != b.field_.get())
        throw DataError("elements belong to different fields");
}

KElem KElem::operator-() const
{
    if (is_zero())
        return *this;
    return KElem(field_, field_->int_neg(unit_), val_, rel_);
}

KElem KElem::operator+(const KElem& b) const
{
    check_same_field(b);
    const long A = std::min(abs_precision(), b.abs_precision());
    if (is_zero() && b.is_zero())
        return zero(field_, A);
    long s = kExact;
    if (!is_zero())
        s = std::min(s, val_);
    if (!b.is_zero())
        s = std::min(s, b.val_);
    if (s >= A)
        return zero(field_, A);
    Integral c = field_->int_zero();
    for (const KElem* x : {this, &b}) {
        if (x->is_zero() || x->val_ >= A)
            continue;
        c = field_->int_add(c, field_->int_mul_pi(x->unit_, x->val_ - s));
    }
    return make_normalized(field_, std::move(c), s, A);
}

KElem KElem::operator-(const KElem& b) const
{
    return *this + (-b);
}

KElem KElem::operator*(const KElem& b) const
{
    check_same_field(b);
    if (is_zero() || b.is_zero()) {
        const long va = is_zero() ? abs_precision() : val_;
        const long vb = b.is_zero() ? b.abs_precision() : b.val_;
        return zero(field_, va + vb);
    }
    return KElem(field_, field_->int_mul(unit_, b.unit_), val_ + b.val_, std::min(rel_, b.rel_));
}

KElem KElem::inverse() const
{
    if (!field_)
        throw DataError("operation on an uninitialised element");
    if (is_zero())
        throw PrecisionError("inverse of an element that is zero to precision");
    return KElem(field_, field_->int_inverse_unit(unit_), -val_, rel_);
}

KElem KElem::operator/(const KElem& b) const
{
    check_same_field(b);
    return *this * b.inverse();
}

KElem KElem::pow(long k) const
{
    if (!field_)
        throw DataError("operation on an uninitialised element");
    if (k == 0)
        return one(field_);
    if (k < 0)
        return inverse().pow(-k);
    if (is_zero())
        return zero(field_, k * abs_precision());
    Integral result = field_->int_one();
    Integral base = unit_;
    for (long e = k; e > 0; e >>= 1) {
        if (e & 1)
            result = field_->int_mul(result, base);
        if (e > 1)
            base = field_->int_mul(base, base);
    }
    return KElem(field_, std::move(result), val_ * k, rel_);
}

KElem KElem::times_pi(long k) const
{
    if (is_zero())
        return zero(field_, abs_precision() + k);
    return KElem(field_, unit_, val_ + k, rel_);
}

KElem KElem::with_abs_precision(long abs_precision_new) const
{
    if (abs_precision_new >= abs_precision())
        return *this;
    if (is_zero() || abs_precision_new <= val_)
        return zero(field_, abs_precision_new);
    return KElem(field_, unit_, val_, abs_precision_new - val_);
}

Integral KElem::to_integral() const
{
    if (is_zero()) {
        if (abs_precision() < 0)
            throw PrecisionError("element is not known to be integral");
        return field_->int_zero();
    }
    if (val_ < 0)
        throw DataError("element is not integral");
    return field_->int_mul_pi(unit_, val_);
}

FiniteField::Elem KElem::residue() const
{
    if (is_zero()) {
        if (abs_precision() < 1)
            throw PrecisionError("residue of an element known to fewer than one digit");
        return 0;
    }
    if (val_ < 0)
        throw DataError("residue of a non-integral element");
    if (val_ > 0)
        return 0;
    return field_->int_residue(unit_);
}

mpz_class KElem::to_mpz() const
{
    if (field_->degree() != 1)
        throw DataError("to_mpz needs an element of Q_p");
    Integral c = to_integral();
    mpz_class m;
    mpz_ui_pow_ui(m.get_mpz_t(), static_cast<unsigned long>(field_->p()),
                  static_cast<unsigned long>(std::max(0L, abs_precision())));
    mpz_class r = c[0];
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
    return r;
}

std::string KElem::to_string() const
{
    std::ostringstream os;
    if (!field_)
        return "<invalid>";
    if (is_zero()) {
        os << "O(pi^" << abs_precision() << ")";
        return os.str();
    }
    const long e = field_->e();
    mpz_class m;
    mpz_ui_pow_ui(m.get_mpz_t(), static_cast<unsigned long>(field_->p()),
                  static_cast<unsigned long>(ceil_div(rel_, e)));
    if (val_ != 0)
        os << "pi^" << val_ << " * ";
    if (unit_.size() == 1) {
        mpz_class r = unit_[0];
        mpz_mod(r.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
        os << r.get_str();
    } else {
        os << "[";
        for (std::size_t i = 0; i < unit_.size(); ++i) {
            mpz_class r = unit_[i];
            mpz_mod(r.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
            os << (i ? "," : "") << r.get_str();
        }
        os << "]";
    }
    os << " + O(pi^" << abs_precision() << ")";
    return os.str();
}

// ---------------------------------------------------------------------------
// KPoly

KPoly KPoly::from_integers(FieldPtr field, const std::vector<mpz_class>& c, long abs_precision)
{
    KPoly f{field, {}};
    for (const auto& x : c)
        f.coeffs.push_back(KElem::from_int(field, x, abs_precision));
    return f;
}

long KPoly::degree() const
{
    for (long i = static_cast<long>(coeffs.size()) - 1; i >= 0; --i)
        if (!coeffs[i].is_zero())
            return i;
    return -1;
}

KElem KPoly::eval(const KElem& x) const
{
    if (coeffs.empty())
        return KElem::zero(field, kExact);
    KElem acc = coeffs.back();
    for (std::size_t i = coeffs.size() - 1; i-- > 0;)
        acc = acc * x + coeffs[i];
    return acc;
}

KPoly KPoly::derivative() const
{
    KPoly d{field, {}};
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        d.coeffs.push_back(coeffs[i] * KElem::exact(field, mpz_class(static_cast<long>(i))));
    if (d.coeffs.empty())
        d.coeffs.push_back(KElem::zero(field, kExact));
    return d;
}

KPoly KPoly::taylor_shift(const KElem& a) const
{
    KPoly g = *this;
    const std::size_t n = g.coeffs.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = n - 1; j-- > i;)
            g.coeffs[j] = g.coeffs[j] + a * g.coeffs[j + 1];
    return g;
}

// ---------------------------------------------------------------------------
// Root finding

namespace {

KElem newton_lift(const KPoly& g, KElem a)
{
    const KPoly dg = g.derivative();
    for (int iter = 0; iter < 200; ++iter) {
        KElem v = g.eval(a);
        KElem d = dg.eval(a);
        if (d.is_zero())
            throw PrecisionError("derivative vanished during Newton lifting");
        if (v.is_zero())
            return a.with_abs_precision(v.abs_precision() - d.valuation());
        a = a - v / d;
    }
    throw PrecisionError("Newton lifting did not converge");
}

std::vector<FiniteField::Elem> residue_poly(const KPoly& g)
{
    std::vector<FiniteField::Elem> r;
    for (const auto& c : g.coeffs)
        r.push_back(c.residue());
    while (!r.empty() && r.back() == 0)
        r.pop_back();
    return r;
}

// Multiplicity of x0 as a root of r over F_q.
int root_multiplicity(const FiniteField& k, std::vector<FiniteField::Elem> r, FiniteField::Elem x0)
{
    int mult = 0;
    while (r.size() > 1) {
        // synthetic division by (x - x0)
        std::vector<FiniteField::Elem> q(r.size() - 1);
        FiniteField::Elem acc = 0;
        for (std::size_t i = r.size(); i-- > 0;) {
            acc = k.add(k.mul(acc, x0), r[i]);
            if (i > 0)
                q[i - 1] = acc;
        }
        if (acc != 0)
            break;
        ++mult;
        r = std::move(q);
    }
    return mult;
}

FiniteField::Elem eval_residue(const FiniteField& k, const std::vector<FiniteField::Elem>& r,
                               FiniteField::Elem x)
{
    FiniteField::Elem acc = 0;
    for (std::size_t i = r.size(); i-- > 0;)
        acc = k.add(k.mul(acc, x), r[i]);
    return acc;
}

// Roots of g in O_K (units only when unit_only); g has integral coefficients
// and unit content.
std::vector<KElem> integral_roots(const KPoly& g, bool unit_only)
{
    const auto& k = g.field->residue_field();
    auto r = residue_poly(g);
    std::vector<KElem> out;
    if (r.size() <= 1)
        return out;
    for (long v = unit_only ? 1 : 0; v < k.q(); ++v) {
        const auto x0 = static_cast<FiniteField::Elem>(v);
        if (eval_residue(k, r, x0) != 0)
            continue;
        const int mult = root_multiplicity(k, r, x0);
        KElem a = KElem::lift(g.field, x0);
        if (mult == 1) {
            out.push_back(newton_lift(g, a));
            continue;
        }
        // h(z) = g(a + pi z) / pi^c
        KPoly h = g.taylor_shift(a);
        long c = kExact;
        for (std::size_t i = 0; i < h.coeffs.size(); ++i) {
            h.coeffs[i] = h.coeffs[i].times_pi(static_cast<long>(i));
            if (!h.coeffs[i].is_zero())
                c = std::min(c, h.coeffs[i].valuation());
        }
        if (c == kExact)
            throw PrecisionError("root cluster vanishes to precision");
        for (auto& x : h.coeffs)
            x = x.times_pi(-c);
        for (const auto& z : integral_roots(h, false))
            out.push_back(a + z.times_pi(1));
    }
    return out;
}

}  // namespace

std::vector<KElem> hensel_roots(const KPoly& f0)
{
    if (!f0.field)
        throw DataError("polynomial without a field");
    const FieldPtr& K = f0.field;
    KPoly f = f0;
    const long deg = f.degree();
    if (deg < 0)
        throw PrecisionError("polynomial is zero to precision");
    if (deg + 1 != static_cast<long>(f.coeffs.size()))
        throw PrecisionError("leading coefficient is zero to precision");
    std::vector<KElem> roots;
    if (deg == 0)
        return roots;

    // roots near zero
    std::size_t k0 = 0;
    while (k0 < f.coeffs.size() && f.coeffs[k0].is_zero())
        ++k0;
    long zero_root_bound = kExact;
    if (k0 > 1)
        throw PrecisionError("multiple root near zero cannot be separated");
    if (k0 == 1) {
        zero_root_bound = f.coeffs[0].abs_precision() - f.coeffs[1].valuation();
        roots.push_back(KElem::zero(K, zero_root_bound));
    }
    KPoly g{K, std::vector<KElem>(f.coeffs.begin() + static_cast<long>(k0), f.coeffs.end())};
    const long n = static_cast<long>(g.coeffs.size()) - 1;

    if (n > 0) {
        // lower convex hull of (i, v_i)
        std::vector<std::pair<long, long>> pts;
        for (long i = 0; i <= n; ++i)
            if (!g.coeffs[i].is_zero())
                pts.emplace_back(i, g.coeffs[i].valuation());
        std::vector<std::pair<long, long>> hull;
        for (const auto& pt : pts) {
            while (hull.size() >= 2) {
                const auto& a = hull[hull.size() - 2];
                const auto& b = hull.back();
                // remove b when it lies on or above segment a-pt
                const long cross = (b.first - a.first) * (pt.second - a.second) -
                                   (b.second - a.second) * (pt.first - a.first);
                if (cross <= 0)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(pt);
        }
        // zero-to-precision coefficients must lie on or above the hull
        for (long i = 0; i <= n; ++i) {
            if (!g.coeffs[i].is_zero())
                continue;
            for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
                const auto& [i0, v0] = hull[s];
                const auto& [i1, v1] = hull[s + 1];
                if (i < i0 || i > i1)
                    continue;
                // abs_i >= v0 + (v1 - v0)(i - i0)/(i1 - i0)
                if (g.coeffs[i].abs_precision() * (i1 - i0) < v0 * (i1 - i0) + (v1 - v0) * (i - i0))
                    throw PrecisionError("coefficient precision too low for the Newton polygon");
            }
        }
        for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
            const auto& [i0, v0] = hull[s];
            const auto& [i1, v1] = hull[s + 1];
            if ((v0 - v1) % (i1 - i0) != 0)
                continue;
            const long lambda = (v0 - v1) / (i1 - i0);
            if (lambda >= zero_root_bound)
                throw PrecisionError("roots near zero cannot be separated");
            const long m = v0 + lambda * i0;
            KPoly gs{K, {}};
            for (long i = 0; i <= n; ++i)
                gs.coeffs.push_back(g.coeffs[i].times_pi(lambda * i - m));
            for (const auto& y : integral_roots(gs, true))
                roots.push_back(y.times_pi(lambda));
        }
    }

    for (const auto& x : roots)
        if (!f0.eval(x).is_zero())
            throw PrecisionError("root failed certification");
    return roots;
}

// ---------------------------------------------------------------------------
// Element predicates and transcendental functions

bool is_square(const KElem& a)
{
    if (a.is_zero())
        throw PrecisionError("square test on an element that is zero to precision");
    if (a.valuation() % 2 != 0)
        return false;
    return a.field()->residue_field().is_square(a.field()->int_residue(a.unit()));
}

std::optional<KElem> square_root(const KElem& a)
{
    if (!is_square(a))
        return std::nullopt;
    const FieldPtr& K = a.field();
    KPoly f{K, {-a, KElem::zero(K, kExact), KElem::one(K)}};
    auto r = hensel_roots(f);
    if (r.empty())
        throw IntegrityError("square root not found for a square");
    return r.front();
}

bool is_pth_power(const KElem& a)
{
    if (a.is_zero())
        throw PrecisionError("p-th power test on an element that is zero to precision");
    const FieldPtr& K = a.field();
    const long p = K->p();
    if (a.valuation() % p != 0)
        return false;
    KPoly f{K, {}};
    f.coeffs.push_back(-a);
    for (long i = 1; i < p; ++i)
        f.coeffs.push_back(KElem::zero(K, kExact));
    f.coeffs.push_back(KElem::one(K));
    return !hensel_roots(f).empty();
}

KElem plog(const KElem& u)
{
    const FieldPtr& K = u.field();
    if (u.is_zero() || u.valuation() != 0)
        throw DataError("logarithm of a non-unit");
    KElem one = KElem::one(K);
    if (u.residue() != 1) {
        // log vanishes on roots of unity: log u = log(u^(q-1)) / (q-1)
        const long q1 = K->residue_field().q() - 1;
        return plog(u.pow(q1)) / KElem::exact(K, mpz_class(q1));
    }
    KElem z = u - one;
    const long T = z.abs_precision();
    if (z.is_zero())
        return KElem::zero(K, T);
    const long w = z.valuation();
    const long e = K->e();
    const long p = K->p();
    const double turn = static_cast<double>(e) / (static_cast<double>(w) * std::log(static_cast<double>(p)));
    KElem sum = KElem::zero(K, T);
    KElem zn = one;
    for (long n = 1;; ++n) {
        zn = zn * z;
        KElem term = zn / KElem::exact(K, mpz_class(n));
        sum = (n % 2) ? sum + term : sum - term;
        const long next = n + 1;
        long lg = 0;
        for (long t = next; t >= p; t /= p)
            ++lg;
        if (static_cast<double>(next) > turn + 1.0 && next * w - e * lg >= T)
            break;
    }
    return sum.with_abs_precision(T);
}

KElem pexp(const KElem& x)
{
    const FieldPtr& K = x.field();
    const long e = K->e();
    const long p = K->p();
    const long T = x.abs_precision();
    // convergence needs v(x) (p-1) > e
    if (x.is_zero()) {
        if (T * (p - 1) <= e)
            throw PrecisionError("exponential argument not known to lie in the domain");
        return KElem::one(K).with_abs_precision(T);
    }
    const long w = x.valuation();
    if (w * (p - 1) <= e)
        throw DataError("exponential diverges: valuation too small");
    KElem sum = KElem::one(K);
    KElem term = KElem::one(K);
    for (long n = 1;; ++n) {
        term = term * x / KElem::exact(K, mpz_class(n));
        sum = sum + term;
        // v(x^m / m!) >= m (w - e/(p-1)) for the tail
        if ((n + 1) * (w * (p - 1) - e) >= T * (p - 1))
            break;
    }
    return sum.with_abs_precision(T);
}

TraceNorm trace_norm_to_base(const KElem& a)
{
    const FieldPtr& K = a.field();
    if (K->degree() == 1)
        return {a, a};
    const FieldPtr B = K->base();
    const long e = K->e();
    const long f = K->f();
    const long A = a.abs_precision();
    if (a.is_zero())
        return {KElem::zero(B, ceil_div(A, e)), KElem::zero(B, f * A)};

    const long v = a.valuation();
    // trace
    KElem trace;
    {
        Integral b;
        long shift = 0;
        if (v >= 0) {
            b = a.to_integral();
        } else {
            // pi^v = (p / pi)^|v| / p^|v|
            shift = -v;
            b = a.unit();
            for (long i = 0; i < shift; ++i)
                b = K->int_mul(b, K->int_div_pi(K->int_from_mpz(mpz_class(K->p())), 1));
        }
        auto m = K->int_mult_matrix(b);
        mpz_class tr = 0;
        for (std::size_t i = 0; i < m.size(); ++i)
            tr += m[i][i];
        trace = KElem::from_int(B, tr, ceil_div(A, e) + shift).times_pi(-shift);
    }
    // norm
    KElem norm;
    {
        mpz_class nu = bareiss_det(K->int_mult_matrix(a.unit()));
        const Integral pi = K->int_mul_pi(K->int_one(), 1);
        mpz_class npi = bareiss_det(K->int_mult_matrix(pi));
        KElem Nu = KElem::from_int(B, nu, ceil_div(a.rel_precision(), e));
        KElem Npi = KElem::exact(B, npi);
        norm = Nu * Npi.pow(v);
    }
    return {trace, norm};
}

KElem teichmuller(const KElem& a)
{
    const FieldPtr& K = a.field();
    if (a.is_zero())
        throw PrecisionError("Teichmuller lift of an element that is zero to precision");
    if (a.valuation() != 0)
        throw DataError("Teichmuller lift of a non-unit");
    const long q = K->residue_field().q();
    KElem x = KElem::lift(K, a.residue());
    for (int iter = 0; iter < 4 * K->precision_cap() + 8; ++iter) {
        KElem y = x.pow(q);
        if ((y - x).is_zero())
            return y;
        x = y;
    }
    throw IntegrityError("Teichmuller iteration did not converge");
}

}  // namespace cft
