#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "emint/gross.hpp"

namespace emint {

using Vec = std::vector<double>;
using Matrix = Eigen::MatrixXd;

/// The stack of total time derivatives of f along solutions at one
/// state: values[j] holds D_j f(y), so values[0] = f(y) and values[j]
/// is the (j+1)-th time derivative of y.
struct LieDerivatives {
    Vec base_state;
    std::vector<Vec> values;

    int order() const { return static_cast<int>(values.size()); }
};

/// How the integrators obtain higher derivatives of the solution:
/// forward differences of infinitesimal Euler micro-states, forward
/// differences of the field sampled along them, or closed forms
/// supplied by the system.
enum class DerivativeStrategy {
    ForwardOnState,
    ForwardOnField,
    Analytic,
};

/// A first-order system y' = f(t, y) whose field is written once as a
/// generic functor and evaluated over either plain doubles or
/// GrossValues; the system itself stays a black box to the callers.
/// Autonomous systems ignore the time argument.
class OdeSystem {
public:
    using RealField = std::function<void(double, std::span<const double>, std::span<double>)>;
    using GrossField =
        std::function<void(const GrossValue&, std::span<const GrossValue>, std::span<GrossValue>)>;
    using Jacobian = std::function<void(double, std::span<const double>, Matrix&)>;
    using AnalyticLie = std::function<LieDerivatives(double, std::span<const double>, int)>;

    OdeSystem() = default;

    /// Wraps a functor with a templated
    ///   operator()(const T& t, std::span<const T> y, std::span<T> dy)
    /// into both arithmetic instantiations.
    template <class Field>
    static OdeSystem from_field(std::string name, int dim, bool autonomous, Field field) {
        OdeSystem s;
        s.name_ = std::move(name);
        s.dim_ = dim;
        s.autonomous_ = autonomous;
        s.f_real_ = [field](double t, std::span<const double> y, std::span<double> dy) {
            field(t, y, dy);
        };
        s.f_gross_ = [field](const GrossValue& t, std::span<const GrossValue> y,
                             std::span<GrossValue> dy) { field(t, y, dy); };
        return s;
    }

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    bool autonomous() const { return autonomous_; }

    void eval(double t, std::span<const double> y, std::span<double> dy) const {
        f_real_(t, y, dy);
    }
    Vec eval(double t, std::span<const double> y) const {
        Vec dy(static_cast<size_t>(dim_));
        f_real_(t, y, dy);
        return dy;
    }
    void eval(const GrossValue& t, std::span<const GrossValue> y, std::span<GrossValue> dy) const {
        f_gross_(t, y, dy);
    }
    GrossVector eval(const GrossValue& t, const GrossVector& y) const {
        GrossVector dy(y.dim(), y.depth());
        f_gross_(t, y.entries(), dy.entries());
        return dy;
    }

    bool has_jacobian() const { return static_cast<bool>(jacobian_); }
    void jacobian(double t, std::span<const double> y, Matrix& out) const;
    OdeSystem& with_jacobian(Jacobian j) {
        jacobian_ = std::move(j);
        return *this;
    }

    bool has_analytic_lie() const { return static_cast<bool>(analytic_lie_); }
    LieDerivatives analytic_lie(double t, std::span<const double> y, int k_max) const;
    OdeSystem& with_analytic_lie(AnalyticLie lie) {
        analytic_lie_ = std::move(lie);
        return *this;
    }

private:
    std::string name_;
    int dim_ = 0;
    bool autonomous_ = true;
    RealField f_real_;
    GrossField f_gross_;
    Jacobian jacobian_;
    AnalyticLie analytic_lie_;
};

}  // namespace emint
