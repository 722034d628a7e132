#ifndef PERFSAMP_STATS_HPP
#define PERFSAMP_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "engine.hpp"

namespace perfsamp {

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyInput : StatsError {
    using StatsError::StatsError;
};
struct LagTooLarge : StatsError {
    using StatsError::StatsError;
};
struct InsufficientLags : StatsError {
    using StatsError::StatsError;
};
struct SupportMismatch : StatsError {
    using StatsError::StatsError;
};

struct EstimateWithError {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t count = 1;

    /// |estimate - target| in standard errors (infinite when SE is 0 and they differ).
    double z_score(double target) const
    {
        const double d = std::abs(estimate - target);
        if (std_error > 0.0)
            return d / std_error;
        return d == 0.0 ? 0.0 : INFINITY;
    }
};

/// Sample mean with the standard error of the mean.
inline EstimateWithError mean_estimate(std::span<const double> xs)
{
    if (xs.empty())
        throw EmptyInput("mean of an empty sample");
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n), xs.size()};
}

/// Binomial proportion with its standard error.
inline EstimateWithError proportion_estimate(std::size_t successes, std::size_t trials)
{
    if (trials == 0)
        throw EmptyInput("proportion over zero trials");
    const double p = static_cast<double>(successes) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

/// Packed index of a ±1 window (first symbol most significant, bit 1 = -1).
inline std::uint32_t pack_window(std::span<const int> values)
{
    std::uint32_t x = 0;
    for (int v : values)
        x = (x << 1) | (v < 0 ? 1u : 0u);
    return x;
}

struct WindowDistribution {
    int width = 0;
    std::vector<double> frequency;
    std::vector<double> std_error;
    std::size_t count = 0;
};

/// Frequencies of the w symbols starting at @p offset of each replica.
inline WindowDistribution empirical_window_distribution(std::span<const SampleWindow> windows, int w,
                                                        std::size_t offset = 0)
{
    if (windows.empty())
        throw EmptyInput("no windows");
    if (w < 1 || w > 24)
        throw std::invalid_argument("window width must lie in [1, 24]");
    WindowDistribution dist{w, std::vector<double>(std::size_t{1} << w, 0.0), {}, windows.size()};
    for (const auto& win : windows) {
        if (win.size() < offset + static_cast<std::size_t>(w))
            throw std::invalid_argument("window shorter than requested width");
        const std::span<const int> v(win.values);
        dist.frequency[pack_window(v.subspan(offset, static_cast<std::size_t>(w)))] += 1.0;
    }
    const auto n = static_cast<double>(windows.size());
    dist.std_error.resize(dist.frequency.size());
    for (std::size_t i = 0; i < dist.frequency.size(); ++i) {
        dist.frequency[i] /= n;
        dist.std_error[i] = std::sqrt(dist.frequency[i] * (1.0 - dist.frequency[i]) / n);
    }
    return dist;
}

/**
 * c_k = E[X_n X_{n-k}]: each replica contributes the mean product over its
 * valid positions, and the standard error comes from replica-to-replica
 * variation.
 */
inline EstimateWithError autocovariance(std::span<const SampleWindow> windows, std::size_t k)
{
    if (windows.empty())
        throw EmptyInput("no windows");
    std::vector<double> per_replica;
    per_replica.reserve(windows.size());
    for (const auto& win : windows) {
        if (win.size() <= k)
            throw LagTooLarge("lag " + std::to_string(k) + " needs windows longer than " +
                              std::to_string(win.size()));
        double s = 0.0;
        for (std::size_t n = k; n < win.size(); ++n)
            s += win.values[n] * win.values[n - k];
        per_replica.push_back(s / static_cast<double>(win.size() - k));
    }
    return mean_estimate(per_replica);
}

namespace detail {

/// Weights a_i with r_k = sum_i a_i c_i.
inline std::vector<double> yule_walker_weights(const CoefficientModel& model, std::size_t k,
                                               std::size_t available)
{
    if (!model.has_finite_support())
        throw std::invalid_argument("Yule-Walker residual requires finite support");
    const auto m = static_cast<std::int64_t>(model.max_lag());
    const auto kk = static_cast<std::int64_t>(k);
    std::int64_t needed = kk;
    for (std::int64_t j = 1; j <= m; ++j)
        needed = std::max(needed, std::abs(kk - j));
    if (needed >= static_cast<std::int64_t>(available))
        throw InsufficientLags("residual at lag " + std::to_string(k) + " needs c_0..c_" +
                               std::to_string(needed));
    std::vector<double> a(available, 0.0);
    a[k] += 1.0;
    for (std::int64_t j = 1; j <= m; ++j)
        a[static_cast<std::size_t>(std::abs(kk - j))] -= model.theta(j);
    return a;
}

} // namespace detail

/**
 * r_k = c_k - sum_j theta_j c_{|k-j|} from estimates c_0..c_K. The standard
 * error treats the c_i as independent.
 */
inline EstimateWithError yule_walker_residual(const CoefficientModel& model,
                                              std::span<const EstimateWithError> c, std::size_t k)
{
    const auto a = detail::yule_walker_weights(model, k, c.size());
    double r = 0.0, var = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        r += a[i] * c[i].estimate;
        var += a[i] * a[i] * c[i].std_error * c[i].std_error;
        count = std::max(count, c[i].count);
    }
    return {r, std::sqrt(var), count};
}

/// Same residual computed replica by replica, so correlations between the
/// c_i are carried into the standard error.
inline EstimateWithError yule_walker_residual(const CoefficientModel& model,
                                              std::span<const SampleWindow> windows, std::size_t k)
{
    if (windows.empty())
        throw EmptyInput("no windows");
    std::size_t shortest = windows.front().size();
    for (const auto& w : windows)
        shortest = std::min(shortest, w.size());
    const auto a = detail::yule_walker_weights(model, k, shortest);
    std::vector<double> per_replica;
    per_replica.reserve(windows.size());
    for (const auto& win : windows) {
        double r = 0.0;
        for (std::size_t lag = 0; lag < a.size(); ++lag) {
            if (a[lag] == 0.0)
                continue;
            double s = 0.0;
            for (std::size_t n = lag; n < win.size(); ++n)
                s += win.values[n] * win.values[n - lag];
            r += a[lag] * s / static_cast<double>(win.size() - lag);
        }
        per_replica.push_back(r);
    }
    return mean_estimate(per_replica);
}

/// Half the L1 distance between two laws on the same finite outcome set.
inline double tv_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw SupportMismatch("distributions have different supports (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + " outcomes)");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

} // namespace perfsamp

#endif // PERFSAMP_STATS_HPP
