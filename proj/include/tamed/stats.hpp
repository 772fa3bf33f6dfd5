#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tamed {

double mean(std::span<const double> x);
/// Unbiased sample variance (0 for fewer than two samples).
double variance(std::span<const double> x);

struct BatchMeans {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t batches = 0;
    std::size_t batch_size = 0;
};

/// Batch-means estimate of a time average and its standard error. Samples
/// beyond batches * floor(n / batches) are dropped from the tail.
BatchMeans batch_means(std::span<const double> x, std::size_t batches);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_std_error = 0.0;
};

/// Ordinary least squares y = intercept + slope x. r_squared is 1 for an
/// exact fit and for constant y.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Trapezoid rule over possibly non-uniform abscissae.
double trapezoid(std::span<const double> t, std::span<const double> y);
/// Running trapezoid integral, out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> y);

/// Element-wise mean of equally long series.
std::vector<double> ensemble_mean(const std::vector<std::vector<double>>& series);

}  // namespace tamed
