#pragma once

#include <span>
#include <string>
#include <vector>

namespace emint {

/// A real number carrying a truncated infinitesimal tail,
///
///     x = c0 + c1*G^-1 + c2*G^-2 + ... + cK*G^-K,
///
/// where G^-1 is the unit infinitesimal used as the micro-stepsize for
/// exact numerical differentiation. Only non-positive powers of G are
/// representable; K is the fixed truncation depth of the value. All
/// arithmetic truncates eagerly at the operands' depth, and mixing two
/// values of different depth is a hard error (a plain double, by
/// contrast, embeds into any depth).
///
/// Immutable value type; safe to copy and share across threads.
class GrossValue {
public:
    /// Zero of depth 0.
    GrossValue() : coeffs_(1, 0.0) {}

    /// A pure real `finite` carried at truncation depth `depth`.
    explicit GrossValue(double finite, int depth = 0);

    /// Builds a value from digits c0..cK (coeffs[k] multiplies G^-k).
    static GrossValue from_coeffs(std::vector<double> coeffs);

    /// Embeds a real at the given depth (tail identically zero).
    static GrossValue lift(double x, int depth);

    /// The unit infinitesimal G^-1 at the given depth (depth >= 1).
    static GrossValue infinitesimal(int depth);

    int depth() const { return static_cast<int>(coeffs_.size()) - 1; }

    /// Digit of G^0.
    double finite() const { return coeffs_[0]; }

    /// Digit of G^-k; throws std::invalid_argument if k > depth.
    double coeff(int k) const;

    std::span<const double> coeffs() const { return coeffs_; }

    GrossValue operator-() const;

    GrossValue& operator+=(const GrossValue& rhs);
    GrossValue& operator-=(const GrossValue& rhs);
    GrossValue& operator*=(const GrossValue& rhs);
    GrossValue& operator/=(const GrossValue& rhs);
    GrossValue& operator+=(double rhs);
    GrossValue& operator-=(double rhs);
    GrossValue& operator*=(double rhs);
    GrossValue& operator/=(double rhs);

private:
    std::vector<double> coeffs_;  // coeffs_[k] multiplies G^-k; size = depth+1
};

GrossValue operator+(const GrossValue& a, const GrossValue& b);
GrossValue operator-(const GrossValue& a, const GrossValue& b);

/// Truncated convolution: digit j of the product collects all
/// contributions a[i]*b[j-i]; anything beyond G^-depth is dropped.
GrossValue operator*(const GrossValue& a, const GrossValue& b);

/// Truncated long division; requires a nonzero finite part of b
/// (division by a pure infinitesimal is not representable here).
/// Multiplying the quotient back by b reproduces a at every retained
/// digit up to rounding.
GrossValue operator/(const GrossValue& a, const GrossValue& b);

GrossValue operator+(const GrossValue& a, double b);
GrossValue operator+(double a, const GrossValue& b);
GrossValue operator-(const GrossValue& a, double b);
GrossValue operator-(double a, const GrossValue& b);
GrossValue operator*(const GrossValue& a, double b);
GrossValue operator*(double a, const GrossValue& b);
GrossValue operator/(const GrossValue& a, double b);
GrossValue operator/(double a, const GrossValue& b);

/// Elementary functions, expanded about the finite part by the exact
/// Taylor recurrences of each function (no series-in-series
/// composition), truncated at the operand's depth.
GrossValue sin(const GrossValue& a);
GrossValue cos(const GrossValue& a);
GrossValue exp(const GrossValue& a);
GrossValue sqrt(const GrossValue& a);  // requires finite part > 0
GrossValue powi(const GrossValue& a, int n);  // n < 0 needs nonzero finite part

/// Digit of G^-k, i.e. the finite part after formal division by G^-k.
double coeff_at(const GrossValue& a, int k);

inline double finite_part(double x) { return x; }
inline double finite_part(const GrossValue& v) { return v.finite(); }

/// Debug rendering "c0 + c1*G^-1 - c2*G^-2"; zero tail digits are
/// omitted, digits printed with the given significant digits.
std::string to_string(const GrossValue& v, int significant_digits = 17);

/// Fixed-dimension vector of GrossValue entries sharing one depth.
class GrossVector {
public:
    GrossVector() = default;
    GrossVector(int dim, int depth);  // zeros

    static GrossVector lift(std::span<const double> y, int depth);

    int dim() const { return static_cast<int>(entries_.size()); }
    int depth() const { return entries_.empty() ? 0 : entries_[0].depth(); }

    GrossValue& operator[](int i) { return entries_[static_cast<size_t>(i)]; }
    const GrossValue& operator[](int i) const { return entries_[static_cast<size_t>(i)]; }

    std::span<GrossValue> entries() { return entries_; }
    std::span<const GrossValue> entries() const { return entries_; }

    /// Finite parts of all entries.
    std::vector<double> finite() const;

private:
    std::vector<GrossValue> entries_;
};

GrossVector operator+(const GrossVector& a, const GrossVector& b);
GrossVector operator-(const GrossVector& a, const GrossVector& b);
GrossVector operator*(const GrossValue& s, const GrossVector& v);
GrossVector operator*(double s, const GrossVector& v);

}  // namespace emint
