#include "tamed/taming.hpp"

#include <cmath>

#include "tamed/errors.hpp"

namespace tamed {
namespace {

double q(double s) { return s * s * s * (6.0 + s * (-8.0 + 3.0 * s)); }
double dq(double s) { return s * s * (18.0 + s * (-32.0 + 15.0 * s)); }
double d2q(double s) { return s * (36.0 + s * (-96.0 + 60.0 * s)); }

}  // namespace

void validate(const TamingConfig& cfg) {
    if (!(cfg.threshold > 0.0) || !std::isfinite(cfg.threshold))
        throw InvalidArgument("taming threshold N must be positive and finite");
}

double taming_g(double r, const TamingConfig& cfg) {
    const double s = r - cfg.threshold;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return s;
    return q(s);
}

double taming_g_prime(double r, const TamingConfig& cfg) {
    const double s = r - cfg.threshold;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return dq(s);
}

double taming_g_second(double r, const TamingConfig& cfg) {
    const double s = r - cfg.threshold;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return d2q(s);
}

double taming_lipschitz() { return dq(0.6); }

double taming_blend_excess() {
    // s - q(s) is smooth on [0,1]; its maximiser solves 1 = q'(s). Golden-section
    // on the unimodal bracket is enough.
    double a = 0.0, b = 1.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [](double s) { return s - q(s); };
    double c = b - phi * (b - a), d = a + phi * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (f(c) > f(d)) b = d;
        else a = c;
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    return f(0.5 * (a + b));
}

}  // namespace tamed
