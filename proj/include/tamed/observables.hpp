#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tamed/operators.hpp"

namespace tamed {

/// Bounded functional of the state with closed-form sup norms.
///
/// grad_sup bounds the gradient in homogeneous H^1 (the dual pairing used by
/// the control construction); it is infinite for observables that are not
/// differentiable.
struct Observable {
    std::string name;
    std::string description;
    double sup = 0.0;       ///< sup |phi|
    double grad_sup = 0.0;  ///< sup ||grad phi||_{H^1}
    std::function<double(const SpectralField&, const Dynamics&)> eval;
};

/// Smooth compactly supported profile rho(s) = exp(1 - 1/(1 - s^2)) on |s| < 1.
double bump(double s);
double bump_derivative(double s);
/// max |rho'|, attained at s^2 = 1/sqrt(3).
double bump_derivative_sup();

/// Product of bumps rho(y_j / a_j) of homogeneous-H^1 coordinates y_j of up to
/// four basis fields. sup = 1, grad_sup = sqrt(sum_j max|rho'|^2 / a_j^2).
Observable cylinder_observable(std::string name, std::vector<std::size_t> modes, std::vector<double> widths);

/// Named catalog: h0_capped (min(||u||^2_{H^0}, cap)), taming_fraction,
/// bump (mode 0) and bump2 (modes 0 and 1).
std::vector<Observable> observable_catalog(double cap = 1.0, double width = 0.5);

/// Look up one catalog entry; throws InvalidArgument for unknown names.
Observable find_observable(const std::vector<Observable>& catalog, const std::string& name);

/// phi(u) = c, for the trivial gradient check.
Observable constant_observable(double c);

}  // namespace tamed
