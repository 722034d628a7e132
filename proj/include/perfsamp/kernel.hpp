#ifndef PERFSAMP_KERNEL_HPP
#define PERFSAMP_KERNEL_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coefficients.hpp"
#include "rng.hpp"

namespace perfsamp {

/// Truncated past w_{-1}, w_{-2}, ..., w_{-n}, most recent first.
class PastWindow {
public:
    PastWindow() = default;

    explicit PastWindow(std::vector<int> values) : values_(std::move(values))
    {
        for (int v : values_)
            if (v != 1 && v != -1)
                throw std::invalid_argument("past window entries must be +1 or -1");
    }

    std::size_t size() const { return values_.size(); }

    /// w_{-k}, 1 <= k <= size().
    int at_lag(std::int64_t k) const { return values_[static_cast<std::size_t>(k - 1)]; }

    const std::vector<int>& values() const { return values_; }

    PastWindow flipped() const
    {
        std::vector<int> v(values_);
        for (int& x : v)
            x = -x;
        return PastWindow(std::move(v));
    }

private:
    std::vector<int> values_;
};

struct ProbInterval {
    double lower = 0.0;
    double upper = 1.0;

    double width() const { return upper - lower; }
    bool contains(double p) const { return lower <= p && p <= upper; }
    bool operator==(const ProbInterval&) const = default;
};

/**
 * Envelope of p(g | w) over every infinite extension of the truncated past:
 * center 1/2 + (g/2) sum_{k<=n} theta_k w_{-k}, half-width T(n+1)/2,
 * clipped to [0,1].
 */
inline ProbInterval kernel_prob(const CoefficientModel& model, int g, const PastWindow& past)
{
    if (g != 1 && g != -1)
        throw std::invalid_argument("symbol must be +1 or -1");
    const auto n = static_cast<std::int64_t>(past.size());
    std::int64_t limit = n;
    if (model.has_finite_support())
        limit = std::min(limit, model.max_lag());
    double s = 0.0;
    for (std::int64_t k = 1; k <= limit; ++k)
        s += model.theta(k) * past.at_lag(k);
    const double center = 0.5 + 0.5 * g * s;
    const double half = 0.5 * model.tail(n + 1);
    return {std::clamp(center - half, 0.0, 1.0), std::clamp(center + half, 0.0, 1.0)};
}

/**
 * Probability that lag sampling returns +1 given a past covering the support:
 * the |theta_k| mass of the lags with sign(theta_k) w_{-k} = +1.
 * Finite-support models only; @p past must have length >= max_lag().
 */
inline double lag_sampling_plus_probability(const CoefficientModel& model, const PastWindow& past)
{
    const std::int64_t m = model.max_lag();
    if (static_cast<std::int64_t>(past.size()) < m)
        throw std::invalid_argument("past window shorter than the support");
    double p = 0.0;
    for (std::int64_t k = 1; k <= m; ++k)
        if (model.sign_theta(k) * past.at_lag(k) == 1)
            p += model.abs_theta(k);
    return p;
}

/// K = min{k >= 1 : CDF(k) >= u}, found by doubling then bisection on the tail.
inline std::int64_t sample_lag(const CoefficientModel& model, double u)
{
    if (model.has_finite_support()) {
        const std::int64_t m = model.max_lag();
        std::int64_t lo = 0, hi = m; // CDF(hi) >= u assumed; fall back to m on rounding
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            (model.cdf(mid) >= u ? hi : lo) = mid;
        }
        return hi;
    }
    // CDF(k) >= u  <=>  T(k+1) <= 1 - u, evaluated on the tail to keep
    // precision for heavy tails.
    const double level = 1.0 - u;
    auto reached = [&](std::int64_t k) { return model.tail(k + 1) <= level; };
    std::int64_t hi = 1;
    while (!reached(hi)) {
        if (hi >= max_representable_lag / 2)
            return max_representable_lag;
        hi *= 2;
    }
    std::int64_t lo = hi / 2; // !reached(lo) or lo == 0
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (reached(mid) ? hi : lo) = mid;
    }
    return hi;
}

inline std::int64_t sample_lag(const CoefficientModel& model, Rng& rng)
{
    return sample_lag(model, uniform_open01(rng));
}

/**
 * Draws the next symbol by copying the past at a random lag K and flipping
 * it when theta_K < 0. @p past_access maps a lag k >= 1 to w_{-k}.
 */
template <typename PastAccess>
int sample_next(const CoefficientModel& model, PastAccess&& past_access, Rng& rng)
{
    const std::int64_t k = sample_lag(model, rng);
    return model.sign_theta(k) * past_access(k);
}

} // namespace perfsamp

#endif // PERFSAMP_KERNEL_HPP
