#ifndef PERFSAMP_ENGINE_HPP
#define PERFSAMP_ENGINE_HPP

/** @file
 * Perfect simulation of the unique process compatible with a linear kernel.
 *
 * One particle starts at each site 1..L. The rightmost active particle jumps
 * left by a lag K drawn with P(K=k) = |theta_k| and multiplies its path sign
 * by sign(theta_K). A particle landing on an occupied site freezes and
 * records its sign relative to the occupant. When a single active particle
 * remains it receives a fair sign, and every frozen particle inherits the
 * product of relative signs along its parent chain.
 */

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coefficients.hpp"
#include "kernel.hpp"
#include "rng.hpp"

namespace perfsamp {

/// Default cap on lag draws per perfect-simulation run.
inline constexpr std::int64_t default_max_draws = 10'000'000;

struct GuardExceeded : std::runtime_error {
    GuardExceeded(std::int64_t limit, std::size_t remaining)
        : std::runtime_error("GuardExceeded: " + std::to_string(limit) + " lag draws used, " +
                             std::to_string(remaining) + " particles still active"),
          max_draws(limit), active_remaining(remaining)
    {
    }
    std::int64_t max_draws;
    std::size_t active_remaining;
};

struct CycleError : std::logic_error {
    using std::logic_error::logic_error;
};

/**
 * State of the coalescing particles. Particle i started at site i+1.
 * A frozen particle has parent >= 0 and relative_sign = X(i) X(parent) at
 * the moment it froze; active particles and stuck particles have parent -1.
 */
struct ParticleSystem {
    std::vector<std::int64_t> position;
    std::vector<int> path_sign;
    std::vector<char> active;
    std::vector<int> parent;
    std::vector<int> relative_sign;
    /// Biased runs only: 1 for particles that stopped on their own (lag 0).
    std::vector<char> stuck;

    explicit ParticleSystem(std::size_t length = 0)
        : position(length), path_sign(length, 1), active(length, 1), parent(length, -1),
          relative_sign(length, 1), stuck(length, 0)
    {
        for (std::size_t i = 0; i < length; ++i)
            position[i] = static_cast<std::int64_t>(i) + 1;
    }

    std::size_t size() const { return position.size(); }

    std::size_t active_count() const
    {
        return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
    }
};

struct SampleWindow {
    std::vector<int> values;   ///< X(1..L)
    std::uint64_t seed = 0;
    std::int64_t draws = 0;

    std::size_t size() const { return values.size(); }
};

/**
 * Signs of all particles given the value of each parentless particle's
 * starting site. Pointer chase with memoization; throws CycleError if the
 * parent relation is not a forest.
 */
template <typename RootValue>
std::vector<int> resolve_forest(const ParticleSystem& system, RootValue&& root_value)
{
    const std::size_t n = system.size();
    std::vector<int> sign(n, 0);
    std::vector<std::size_t> chain;
    for (std::size_t i = 0; i < n; ++i) {
        chain.clear();
        std::size_t j = i;
        while (sign[j] == 0 && system.parent[j] >= 0) {
            chain.push_back(j);
            if (chain.size() > n)
                throw CycleError("coalescence tree contains a cycle");
            j = static_cast<std::size_t>(system.parent[j]);
        }
        if (sign[j] == 0)
            sign[j] = root_value(j);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            const auto p = static_cast<std::size_t>(system.parent[*it]);
            sign[*it] = system.relative_sign[*it] * sign[p];
        }
    }
    return sign;
}

/// Signs when exactly one particle is still active and gets @p root_sign.
inline std::vector<int> resolve_signs(const ParticleSystem& system, int root_sign)
{
    if (system.active_count() != 1)
        throw std::invalid_argument("resolve_signs requires exactly one active particle");
    return resolve_forest(system, [&](std::size_t i) {
        if (!system.active[i])
            throw CycleError("parentless particle is not the active root");
        return root_sign;
    });
}

struct SignedCoalescence {
    ParticleSystem system;
    std::int64_t draws = 0;
};

namespace detail {

/// Moves the rightmost active particle and freezes it on collision.
/// Landing sites that already host frozen particles attach the mover to the
/// earliest of them; otherwise to the active occupant.
class CoalescenceState {
public:
    explicit CoalescenceState(std::int64_t length) : system(static_cast<std::size_t>(length))
    {
        for (std::int64_t i = 0; i < length; ++i)
            active_at.emplace_hint(active_at.end(), i + 1, static_cast<int>(i));
    }

    int rightmost() const { return active_at.rbegin()->second; }

    void move(int j, std::int64_t lag, int arc_sign)
    {
        auto& pos = system.position[static_cast<std::size_t>(j)];
        active_at.erase(pos);
        pos -= lag;
        system.path_sign[static_cast<std::size_t>(j)] *= arc_sign;
        land(j);
    }

    void stick(int j)
    {
        const auto ju = static_cast<std::size_t>(j);
        active_at.erase(system.position[ju]);
        system.active[ju] = 0;
        system.stuck[ju] = 1;
        frozen_first.emplace(system.position[ju], j);
    }

    ParticleSystem system;
    std::map<std::int64_t, int> active_at;
    std::unordered_map<std::int64_t, int> frozen_first;

private:
    void land(int j)
    {
        const auto ju = static_cast<std::size_t>(j);
        const std::int64_t site = system.position[ju];
        int parent = -1;
        if (auto f = frozen_first.find(site); f != frozen_first.end())
            parent = f->second;
        else if (auto a = active_at.find(site); a != active_at.end())
            parent = a->second;
        if (parent < 0) {
            active_at.emplace(site, j);
            return;
        }
        system.active[ju] = 0;
        system.parent[ju] = parent;
        system.relative_sign[ju] =
            system.path_sign[ju] * system.path_sign[static_cast<std::size_t>(parent)];
        frozen_first.emplace(site, j);
    }
};

} // namespace detail

/// Runs the signed coalescence of particles 1..L until one remains active.
inline SignedCoalescence coalesce_signed(const CoefficientModel& model, std::int64_t length,
                                         Rng& rng, std::int64_t max_draws = default_max_draws)
{
    if (length < 1)
        throw std::invalid_argument("window length must be >= 1");
    detail::CoalescenceState state(length);
    std::int64_t draws = 0;
    while (state.active_at.size() > 1) {
        if (draws >= max_draws)
            throw GuardExceeded(max_draws, state.active_at.size());
        const std::int64_t k = sample_lag(model, rng);
        ++draws;
        state.move(state.rightmost(), k, model.sign_theta(k));
    }
    return {std::move(state.system), draws};
}

/// Exact sample X(1..L) of the process built from the coalescence forest.
inline SampleWindow perfect_simulate(const CoefficientModel& model, std::int64_t length, Rng& rng,
                                     std::int64_t max_draws = default_max_draws)
{
    auto run = coalesce_signed(model, length, rng, max_draws);
    const int root_sign = fair_sign(rng);
    return {resolve_signs(run.system, root_sign), 0, run.draws};
}

inline SampleWindow perfect_simulate(const CoefficientModel& model, std::int64_t length,
                                     std::uint64_t seed,
                                     std::int64_t max_draws = default_max_draws)
{
    Rng rng(seed);
    auto w = perfect_simulate(model, length, rng, max_draws);
    w.seed = seed;
    return w;
}

/**
 * Biased kernel: each draw sticks the moving particle with probability
 * 1 - r_0, otherwise moves it by a lag of the base model. A stuck particle's
 * site gets a terminal sign U with P(U = +1) = (1 - r_0 + theta_0) / (2 (1 - r_0)),
 * drawn once per site.
 */
inline SampleWindow perfect_simulate_biased(const BiasedModel& model, std::int64_t length,
                                            Rng& rng, std::int64_t max_draws = default_max_draws)
{
    if (length < 1)
        throw std::invalid_argument("window length must be >= 1");
    const double stick_mass = 1.0 - model.lag_mass;
    const double plus_prob = model.stuck_plus_probability();
    detail::CoalescenceState state(length);
    std::unordered_map<std::int64_t, int> terminal;
    std::int64_t draws = 0;
    while (!state.active_at.empty()) {
        if (draws >= max_draws)
            throw GuardExceeded(max_draws, state.active_at.size());
        const int j = state.rightmost();
        const double u = uniform_open01(rng);
        ++draws;
        if (u <= stick_mass) {
            const std::int64_t site = state.system.position[static_cast<std::size_t>(j)];
            if (!terminal.contains(site))
                terminal.emplace(site, uniform_open01(rng) < plus_prob ? 1 : -1);
            state.stick(j);
            continue;
        }
        const double v = std::min((u - stick_mass) / model.lag_mass, 1.0 - 0x1.0p-53);
        const std::int64_t k = sample_lag(model.base, v);
        state.move(j, k, model.base.sign_theta(k));
    }
    const auto& sys = state.system;
    auto values = resolve_forest(sys, [&](std::size_t i) {
        if (!sys.stuck[i])
            throw CycleError("parentless particle did not stick");
        return sys.path_sign[i] * terminal.at(sys.position[i]);
    });
    return {std::move(values), 0, draws};
}

inline SampleWindow perfect_simulate_biased(const BiasedModel& model, std::int64_t length,
                                            std::uint64_t seed,
                                            std::int64_t max_draws = default_max_draws)
{
    Rng rng(seed);
    auto w = perfect_simulate_biased(model, length, rng, max_draws);
    w.seed = seed;
    return w;
}

// ---------------------------------------------------------------------------
// Boundary-conditioned process

/// Boundary configuration w_{-1}, w_{-2}, ... placed left of site -n.
class BoundarySpec {
public:
    enum class Kind { all_plus, all_minus, periodic };

    static BoundarySpec all_plus() { return BoundarySpec(Kind::all_plus, {1}); }
    static BoundarySpec all_minus() { return BoundarySpec(Kind::all_minus, {-1}); }

    /// w_{-i} = pattern[(i-1) mod P].
    static BoundarySpec periodic(std::vector<int> pattern)
    {
        if (pattern.empty())
            throw std::invalid_argument("boundary pattern must be nonempty");
        for (int v : pattern)
            if (v != 1 && v != -1)
                throw std::invalid_argument("boundary pattern entries must be +1 or -1");
        return BoundarySpec(Kind::periodic, std::move(pattern));
    }

    Kind kind() const { return kind_; }
    const std::vector<int>& pattern() const { return pattern_; }

    /// w_{-i}, i >= 1.
    int value(std::int64_t i) const
    {
        return pattern_[static_cast<std::size_t>((i - 1) % static_cast<std::int64_t>(pattern_.size()))];
    }

private:
    BoundarySpec(Kind k, std::vector<int> p) : kind_(k), pattern_(std::move(p)) {}
    Kind kind_;
    std::vector<int> pattern_;
};

/// Oriented path from a site down into the boundary.
struct BoundaryPath {
    int path_sign = 1;
    /// i >= 1 such that the path stopped at site -n - i, i.e. reads w_{-i}.
    std::int64_t boundary_offset = 1;
    std::int64_t steps = 0;
};

inline BoundaryPath boundary_path(const CoefficientModel& model, std::int64_t n,
                                  std::int64_t site, Rng& rng)
{
    if (n < 0 || site < -n)
        throw std::invalid_argument("boundary_path requires n >= 0 and site >= -n");
    BoundaryPath path;
    std::int64_t pos = site;
    while (pos >= -n) {
        const std::int64_t k = sample_lag(model, rng);
        path.path_sign *= model.sign_theta(k);
        pos -= k;
        ++path.steps;
    }
    path.boundary_offset = -n - pos;
    return path;
}

/// X_site of the process frozen to @p boundary left of -n.
inline int boundary_simulate(const CoefficientModel& model, std::int64_t n,
                             const BoundarySpec& boundary, std::int64_t site, Rng& rng)
{
    const BoundaryPath path = boundary_path(model, n, site, rng);
    switch (boundary.kind()) {
    case BoundarySpec::Kind::all_plus:
        return path.path_sign;
    case BoundarySpec::Kind::all_minus:
        return -path.path_sign;
    case BoundarySpec::Kind::periodic:
        break;
    }
    return path.path_sign * boundary.value(path.boundary_offset);
}

} // namespace perfsamp

#endif // PERFSAMP_ENGINE_HPP
