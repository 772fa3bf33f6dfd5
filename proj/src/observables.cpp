#include "tamed/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tamed/errors.hpp"

namespace tamed {

double bump(double s) {
    const double w = 1.0 - s * s;
    if (w <= 0.0) return 0.0;
    return std::exp(1.0 - 1.0 / w);
}

double bump_derivative(double s) {
    const double w = 1.0 - s * s;
    if (w <= 0.0) return 0.0;
    return -2.0 * s / (w * w) * bump(s);
}

double bump_derivative_sup() {
    const double s = std::sqrt(1.0 / std::sqrt(3.0));
    return std::abs(bump_derivative(s));
}

Observable cylinder_observable(std::string name, std::vector<std::size_t> modes, std::vector<double> widths) {
    if (modes.empty() || modes.size() > 4 || modes.size() != widths.size())
        throw InvalidArgument("cylinder observable needs 1 to 4 modes with one width each");
    double g2 = 0.0;
    for (double a : widths) {
        if (!(a > 0.0)) throw InvalidArgument("bump widths must be positive");
        g2 += bump_derivative_sup() * bump_derivative_sup() / (a * a);
    }
    Observable o;
    o.name = std::move(name);
    o.description = "product of bumps of H1 coordinates";
    o.sup = 1.0;
    o.grad_sup = std::sqrt(g2);
    o.eval = [modes, widths](const SpectralField& u, const Dynamics&) {
        double v = 1.0;
        for (std::size_t j = 0; j < modes.size(); ++j)
            v *= bump(basis_coordinate(u, modes[j], BasisScale::H1_homog) / widths[j]);
        return v;
    };
    return o;
}

std::vector<Observable> observable_catalog(double cap, double width) {
    std::vector<Observable> out;
    Observable h0;
    h0.name = "h0_capped";
    h0.description = "min(||u||^2_H0, cap)";
    h0.sup = cap;
    h0.grad_sup = std::numeric_limits<double>::infinity();
    h0.eval = [cap](const SpectralField& u, const Dynamics&) {
        return std::min(sobolev_norm_sq(u, 0, NormConvention::full), cap);
    };
    out.push_back(h0);

    Observable tf;
    tf.name = "taming_fraction";
    tf.description = "share of grid points with |u|^2 > N";
    tf.sup = 1.0;
    tf.grad_sup = std::numeric_limits<double>::infinity();
    tf.eval = [](const SpectralField& u, const Dynamics& d) {
        return d.taming_fraction(PhysicalState{d.grid().to_physical(u), {}});
    };
    out.push_back(tf);

    out.push_back(cylinder_observable("bump", {0}, {width}));
    out.back().description = "bump of the first H1 coordinate";
    out.push_back(cylinder_observable("bump2", {0, 1}, {width, width}));
    out.back().description = "bump product of the first two H1 coordinates";
    return out;
}

Observable find_observable(const std::vector<Observable>& catalog, const std::string& name) {
    for (const auto& o : catalog)
        if (o.name == name) return o;
    throw InvalidArgument("unknown observable '" + name + "'");
}

Observable constant_observable(double c) {
    Observable o;
    o.name = "constant";
    o.description = "constant functional";
    o.sup = std::abs(c);
    o.grad_sup = 0.0;
    o.eval = [c](const SpectralField&, const Dynamics&) { return c; };
    return o;
}

}  // namespace tamed
