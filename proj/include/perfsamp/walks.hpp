#ifndef PERFSAMP_WALKS_HPP
#define PERFSAMP_WALKS_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "coefficients.hpp"
#include "kernel.hpp"
#include "rng.hpp"

namespace perfsamp {

/// Reflected walk Y_{n+1} = |Y_n - K_{n+1}|.
inline std::int64_t von_schelling_step(std::int64_t y, std::int64_t k)
{
    return y >= k ? y - k : k - y;
}

struct VonSchellingTrace {
    std::int64_t initial = 1;
    bool hit_zero = false;
    /// Hitting step when hit_zero, otherwise the censoring horizon.
    std::int64_t steps = 0;
    /// States Y_0..Y_steps, filled only when requested.
    std::vector<std::int64_t> path;
};

/**
 * Runs the reflected walk from @p y0 with i.i.d. lags until it hits 0 or
 * @p max_steps lags have been drawn.
 */
inline VonSchellingTrace hitting_time(const CoefficientModel& model, std::int64_t y0,
                                      std::int64_t max_steps, Rng& rng, bool record_path = false)
{
    if (y0 < 1)
        throw std::invalid_argument("hitting_time: y0 must be >= 1");
    VonSchellingTrace trace;
    trace.initial = y0;
    if (record_path)
        trace.path.push_back(y0);
    std::int64_t y = y0;
    for (std::int64_t t = 1; t <= max_steps; ++t) {
        y = von_schelling_step(y, sample_lag(model, rng));
        if (record_path)
            trace.path.push_back(y);
        if (y == 0) {
            trace.hit_zero = true;
            trace.steps = t;
            return trace;
        }
    }
    trace.steps = max_steps;
    return trace;
}

struct CoalescenceReport {
    std::int64_t left = 0;
    std::int64_t right = 0;
    bool coalesced = false;
    /// Common site of all particles; meaningful only when coalesced.
    std::int64_t root = 0;
    std::int64_t draws = 0;
    std::int64_t depth_limit = 0;
};

/**
 * Unsigned coalescence of one particle per site of [left, right]: the
 * rightmost particle jumps left by a sampled lag and merges into any
 * particle already at its landing site. Gives up once a particle drops
 * below left - depth_limit.
 */
inline CoalescenceReport coalesce_window(const CoefficientModel& model, std::int64_t left,
                                         std::int64_t right, std::int64_t depth_limit, Rng& rng)
{
    if (left > right)
        throw std::invalid_argument("coalesce_window: empty window");
    CoalescenceReport report{left, right, false, 0, 0, depth_limit};
    std::set<std::int64_t> active;
    for (std::int64_t s = left; s <= right; ++s)
        active.insert(active.end(), s);
    const std::int64_t floor = left - depth_limit;
    while (active.size() > 1) {
        const auto top = std::prev(active.end());
        const std::int64_t landing = *top - sample_lag(model, rng);
        ++report.draws;
        active.erase(top);
        if (landing < floor)
            return report;
        active.insert(landing);
    }
    report.coalesced = true;
    report.root = *active.begin();
    return report;
}

} // namespace perfsamp

#endif // PERFSAMP_WALKS_HPP
