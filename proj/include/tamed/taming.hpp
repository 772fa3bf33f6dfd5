#pragma once

namespace tamed {

/// Threshold of the taming function. On [N, N+1] the function follows the
/// quintic q(s) = 6 s^3 - 8 s^4 + 3 s^5 with s = r - N, which matches value,
/// slope and curvature of both neighbouring pieces.
struct TamingConfig {
    double threshold = 1.0;  ///< N > 0, in velocity^2 units
};

/// Throws InvalidArgument unless N > 0 and finite.
void validate(const TamingConfig& cfg);

double taming_g(double r, const TamingConfig& cfg);
double taming_g_prime(double r, const TamingConfig& cfg);
double taming_g_second(double r, const TamingConfig& cfg);

/// max g' over r >= 0 (the Lipschitz constant of g), attained at r = N + 0.6.
double taming_lipschitz();

/// sup over s in [0,1] of s - q(s): how far the blend lags behind r - N.
/// Gives r g(r) >= r^2 - (N + excess) r for all r >= 0.
double taming_blend_excess();

}  // namespace tamed
