#include "tamed/stats.hpp"

#include <cmath>

#include "tamed/errors.hpp"

namespace tamed {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / double(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / double(x.size() - 1);
}

BatchMeans batch_means(std::span<const double> x, std::size_t batches) {
    if (batches < 2) throw InvalidArgument("batch means needs at least two batches");
    if (x.size() < batches) throw InvalidArgument("fewer samples than batches");
    BatchMeans out;
    out.batches = batches;
    out.batch_size = x.size() / batches;
    std::vector<double> bm(batches);
    for (std::size_t b = 0; b < batches; ++b) bm[b] = mean(x.subspan(b * out.batch_size, out.batch_size));
    out.mean = mean(bm);
    out.std_error = std::sqrt(variance(bm) / double(batches));
    return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("linear fit needs two equally long series");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("linear fit with constant abscissa");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (x.size() > 2) f.slope_std_error = std::sqrt(sse / double(x.size() - 2) / sxx);
    return f;
}

double trapezoid(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw InvalidArgument("trapezoid: length mismatch");
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw InvalidArgument("trapezoid: length mismatch");
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return out;
}

std::vector<double> ensemble_mean(const std::vector<std::vector<double>>& series) {
    if (series.empty()) return {};
    std::vector<double> out(series.front().size(), 0.0);
    for (const auto& s : series) {
        if (s.size() != out.size()) throw InvalidArgument("ensemble series of unequal length");
        for (std::size_t i = 0; i < s.size(); ++i) out[i] += s[i];
    }
    for (double& v : out) v /= double(series.size());
    return out;
}

}  // namespace tamed
