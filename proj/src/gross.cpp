#include "emint/gross.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace emint {

namespace {

void require_same_depth(const GrossValue& a, const GrossValue& b) {
    if (a.depth() != b.depth()) {
        throw std::invalid_argument("gross depth mismatch: " + std::to_string(a.depth()) +
                                    " vs " + std::to_string(b.depth()));
    }
}

}  // namespace

GrossValue::GrossValue(double finite, int depth) {
    if (depth < 0) throw std::invalid_argument("gross depth must be non-negative");
    coeffs_.assign(static_cast<size_t>(depth) + 1, 0.0);
    coeffs_[0] = finite;
}

GrossValue GrossValue::from_coeffs(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("gross value needs at least the finite digit");
    GrossValue v;
    v.coeffs_ = std::move(coeffs);
    return v;
}

GrossValue GrossValue::lift(double x, int depth) { return GrossValue(x, depth); }

GrossValue GrossValue::infinitesimal(int depth) {
    if (depth < 1) throw std::invalid_argument("unit infinitesimal needs depth >= 1");
    GrossValue v(0.0, depth);
    v.coeffs_[1] = 1.0;
    return v;
}

double GrossValue::coeff(int k) const {
    if (k < 0 || k > depth()) {
        throw std::invalid_argument("grossdigit index " + std::to_string(k) +
                                    " out of range for depth " + std::to_string(depth()));
    }
    return coeffs_[static_cast<size_t>(k)];
}

GrossValue GrossValue::operator-() const {
    GrossValue r = *this;
    for (double& c : r.coeffs_) c = -c;
    return r;
}

GrossValue operator+(const GrossValue& a, const GrossValue& b) {
    require_same_depth(a, b);
    std::vector<double> c(a.coeffs().begin(), a.coeffs().end());
    for (int k = 0; k <= b.depth(); ++k) c[static_cast<size_t>(k)] += b.coeffs()[static_cast<size_t>(k)];
    return GrossValue::from_coeffs(std::move(c));
}

GrossValue operator-(const GrossValue& a, const GrossValue& b) {
    require_same_depth(a, b);
    std::vector<double> c(a.coeffs().begin(), a.coeffs().end());
    for (int k = 0; k <= b.depth(); ++k) c[static_cast<size_t>(k)] -= b.coeffs()[static_cast<size_t>(k)];
    return GrossValue::from_coeffs(std::move(c));
}

GrossValue operator*(const GrossValue& a, const GrossValue& b) {
    require_same_depth(a, b);
    const int depth = a.depth();
    std::vector<double> c(static_cast<size_t>(depth) + 1, 0.0);
    for (int j = 0; j <= depth; ++j) {
        double s = 0.0;
        for (int i = 0; i <= j; ++i) s += a.coeffs()[static_cast<size_t>(i)] * b.coeffs()[static_cast<size_t>(j - i)];
        c[static_cast<size_t>(j)] = s;
    }
    return GrossValue::from_coeffs(std::move(c));
}

GrossValue operator/(const GrossValue& a, const GrossValue& b) {
    require_same_depth(a, b);
    if (b.finite() == 0.0) throw std::domain_error("gross division by a pure infinitesimal");
    const int depth = a.depth();
    // Long division: q[j] = (a[j] - sum_{i=1..j} b[i] q[j-i]) / b[0].
    std::vector<double> q(static_cast<size_t>(depth) + 1, 0.0);
    for (int j = 0; j <= depth; ++j) {
        double s = a.coeffs()[static_cast<size_t>(j)];
        for (int i = 1; i <= j; ++i) s -= b.coeffs()[static_cast<size_t>(i)] * q[static_cast<size_t>(j - i)];
        q[static_cast<size_t>(j)] = s / b.finite();
    }
    return GrossValue::from_coeffs(std::move(q));
}

GrossValue operator+(const GrossValue& a, double b) { return a + GrossValue::lift(b, a.depth()); }
GrossValue operator+(double a, const GrossValue& b) { return GrossValue::lift(a, b.depth()) + b; }
GrossValue operator-(const GrossValue& a, double b) { return a - GrossValue::lift(b, a.depth()); }
GrossValue operator-(double a, const GrossValue& b) { return GrossValue::lift(a, b.depth()) - b; }
GrossValue operator*(const GrossValue& a, double b) {
    GrossValue r = a;
    r *= b;
    return r;
}
GrossValue operator*(double a, const GrossValue& b) { return b * a; }
GrossValue operator/(const GrossValue& a, double b) { return a / GrossValue::lift(b, a.depth()); }
GrossValue operator/(double a, const GrossValue& b) { return GrossValue::lift(a, b.depth()) / b; }

GrossValue& GrossValue::operator+=(const GrossValue& rhs) { return *this = *this + rhs; }
GrossValue& GrossValue::operator-=(const GrossValue& rhs) { return *this = *this - rhs; }
GrossValue& GrossValue::operator*=(const GrossValue& rhs) { return *this = *this * rhs; }
GrossValue& GrossValue::operator/=(const GrossValue& rhs) { return *this = *this / rhs; }
GrossValue& GrossValue::operator+=(double rhs) {
    coeffs_[0] += rhs;
    return *this;
}
GrossValue& GrossValue::operator-=(double rhs) {
    coeffs_[0] -= rhs;
    return *this;
}
GrossValue& GrossValue::operator*=(double rhs) {
    for (double& c : coeffs_) c *= rhs;
    return *this;
}
GrossValue& GrossValue::operator/=(double rhs) {
    for (double& c : coeffs_) c /= rhs;
    return *this;
}

namespace {

// sin and cos share one recurrence: with s = sin(a), c = cos(a),
//   s[k] = ( 1/k) sum_{j=1..k} j a[j] c[k-j]
//   c[k] = (-1/k) sum_{j=1..k} j a[j] s[k-j]
std::pair<GrossValue, GrossValue> sincos(const GrossValue& a) {
    const int depth = a.depth();
    std::vector<double> s(static_cast<size_t>(depth) + 1, 0.0);
    std::vector<double> c(static_cast<size_t>(depth) + 1, 0.0);
    s[0] = std::sin(a.finite());
    c[0] = std::cos(a.finite());
    for (int k = 1; k <= depth; ++k) {
        double ss = 0.0, cs = 0.0;
        for (int j = 1; j <= k; ++j) {
            const double ja = j * a.coeffs()[static_cast<size_t>(j)];
            ss += ja * c[static_cast<size_t>(k - j)];
            cs += ja * s[static_cast<size_t>(k - j)];
        }
        s[static_cast<size_t>(k)] = ss / k;
        c[static_cast<size_t>(k)] = -cs / k;
    }
    return {GrossValue::from_coeffs(std::move(s)), GrossValue::from_coeffs(std::move(c))};
}

}  // namespace

GrossValue sin(const GrossValue& a) { return sincos(a).first; }
GrossValue cos(const GrossValue& a) { return sincos(a).second; }

GrossValue exp(const GrossValue& a) {
    const int depth = a.depth();
    std::vector<double> e(static_cast<size_t>(depth) + 1, 0.0);
    e[0] = std::exp(a.finite());
    for (int k = 1; k <= depth; ++k) {
        double s = 0.0;
        for (int j = 1; j <= k; ++j) s += j * a.coeffs()[static_cast<size_t>(j)] * e[static_cast<size_t>(k - j)];
        e[static_cast<size_t>(k)] = s / k;
    }
    return GrossValue::from_coeffs(std::move(e));
}

GrossValue sqrt(const GrossValue& a) {
    if (!(a.finite() > 0.0)) throw std::domain_error("gross sqrt needs a positive finite part");
    const int depth = a.depth();
    std::vector<double> r(static_cast<size_t>(depth) + 1, 0.0);
    r[0] = std::sqrt(a.finite());
    // From r*r = a: r[k] = (a[k] - sum_{j=1..k-1} r[j] r[k-j]) / (2 r[0]).
    for (int k = 1; k <= depth; ++k) {
        double s = a.coeffs()[static_cast<size_t>(k)];
        for (int j = 1; j <= k - 1; ++j) s -= r[static_cast<size_t>(j)] * r[static_cast<size_t>(k - j)];
        r[static_cast<size_t>(k)] = s / (2.0 * r[0]);
    }
    return GrossValue::from_coeffs(std::move(r));
}

GrossValue powi(const GrossValue& a, int n) {
    if (n < 0) return GrossValue::lift(1.0, a.depth()) / powi(a, -n);
    GrossValue result = GrossValue::lift(1.0, a.depth());
    GrossValue base = a;
    unsigned k = static_cast<unsigned>(n);
    while (k > 0) {
        if (k & 1u) result *= base;
        k >>= 1;
        if (k > 0) base *= base;
    }
    return result;
}

double coeff_at(const GrossValue& a, int k) { return a.coeff(k); }

std::string to_string(const GrossValue& v, int significant_digits) {
    char buf[64];
    auto digit = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, x);
        return std::string(buf);
    };
    std::string out = digit(v.finite());
    for (int k = 1; k <= v.depth(); ++k) {
        const double c = v.coeffs()[static_cast<size_t>(k)];
        if (c == 0.0) continue;
        out += (c < 0.0) ? " - " : " + ";
        out += digit(std::abs(c));
        out += "*G^-" + std::to_string(k);
    }
    return out;
}

GrossVector::GrossVector(int dim, int depth) {
    if (dim < 0) throw std::invalid_argument("gross vector dimension must be non-negative");
    entries_.assign(static_cast<size_t>(dim), GrossValue(0.0, depth));
}

GrossVector GrossVector::lift(std::span<const double> y, int depth) {
    GrossVector v(static_cast<int>(y.size()), depth);
    for (size_t i = 0; i < y.size(); ++i) v.entries_[i] = GrossValue::lift(y[i], depth);
    return v;
}

std::vector<double> GrossVector::finite() const {
    std::vector<double> out(entries_.size());
    for (size_t i = 0; i < entries_.size(); ++i) out[i] = entries_[i].finite();
    return out;
}

namespace {

void require_same_dim(const GrossVector& a, const GrossVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("gross vector dimension mismatch: " + std::to_string(a.dim()) +
                                    " vs " + std::to_string(b.dim()));
    }
}

}  // namespace

GrossVector operator+(const GrossVector& a, const GrossVector& b) {
    require_same_dim(a, b);
    GrossVector r = a;
    for (int i = 0; i < r.dim(); ++i) r[i] += b[i];
    return r;
}

GrossVector operator-(const GrossVector& a, const GrossVector& b) {
    require_same_dim(a, b);
    GrossVector r = a;
    for (int i = 0; i < r.dim(); ++i) r[i] -= b[i];
    return r;
}

GrossVector operator*(const GrossValue& s, const GrossVector& v) {
    GrossVector r = v;
    for (int i = 0; i < r.dim(); ++i) r[i] = s * v[i];
    return r;
}

GrossVector operator*(double s, const GrossVector& v) {
    GrossVector r = v;
    for (int i = 0; i < r.dim(); ++i) r[i] *= s;
    return r;
}

}  // namespace emint
