#include "emint/ode_system.hpp"

#include <stdexcept>

namespace emint {

void OdeSystem::jacobian(double t, std::span<const double> y, Matrix& out) const {
    if (!jacobian_) {
        throw std::invalid_argument("system '" + name_ + "' supplies no analytic Jacobian");
    }
    out.resize(dim_, dim_);
    jacobian_(t, y, out);
}

LieDerivatives OdeSystem::analytic_lie(double t, std::span<const double> y, int k_max) const {
    if (!analytic_lie_) {
        throw std::invalid_argument("system '" + name_ + "' supplies no closed-form derivatives");
    }
    return analytic_lie_(t, y, k_max);
}

}  // namespace emint
