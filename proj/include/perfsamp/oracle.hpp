#ifndef PERFSAMP_ORACLE_HPP
#define PERFSAMP_ORACLE_HPP

/** @file
 * Exact finite-memory Markov chain for finite-support models.
 *
 * A state is the history (w_{-m}, ..., w_{-1}) packed into an m-bit integer
 * with w_{-k} stored in bit k-1 (w_{-1} least significant) and bit value 1
 * meaning -1. Windows (x_1, ..., x_w) use the same packing with x_w least
 * significant, so index 0 is the all-plus window and for w = 2 the order is
 * (+,+), (+,-), (-,+), (-,-).
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "engine.hpp"

namespace perfsamp {

struct MemoryTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EnumerationTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// ±1 value of bit @p bit of a packed history or window.
inline int packed_symbol(std::uint32_t packed, int bit)
{
    return ((packed >> bit) & 1u) ? -1 : 1;
}

class MarkovOracle {
public:
    static constexpr int max_memory = 16;
    /// Transition probabilities at or below this are treated as exact zeros.
    static constexpr double zero_tolerance = 1e-12;

    explicit MarkovOracle(const CoefficientModel& model)
    {
        if (!model.has_finite_support())
            throw std::invalid_argument("oracle requires a finite-support model");
        memory_ = static_cast<int>(model.max_lag());
        if (model.max_lag() > max_memory)
            throw MemoryTooLarge("oracle memory " + std::to_string(model.max_lag()) +
                                 " exceeds " + std::to_string(max_memory));
        const std::uint32_t n = state_count();
        plus_.resize(n);
        for (std::uint32_t h = 0; h < n; ++h) {
            double s = 0.0;
            for (int k = 1; k <= memory_; ++k)
                s += model.theta(k) * packed_symbol(h, k - 1);
            double p = 0.5 + 0.5 * s;
            if (p < -zero_tolerance || p > 1.0 + zero_tolerance)
                throw std::logic_error("kernel probability outside [0,1]");
            if (p <= zero_tolerance)
                p = 0.0;
            else if (p >= 1.0 - zero_tolerance)
                p = 1.0;
            plus_[h] = p;
        }
        find_recurrent_classes();
    }

    int memory() const { return memory_; }
    std::uint32_t state_count() const { return std::uint32_t{1} << memory_; }

    /// P(next = +1 | history h).
    double plus_probability(std::uint32_t h) const { return plus_[h]; }

    double symbol_probability(std::uint32_t h, int g) const
    {
        return g > 0 ? plus_[h] : 1.0 - plus_[h];
    }

    std::uint32_t successor(std::uint32_t h, int g) const
    {
        return ((h << 1) | (g < 0 ? 1u : 0u)) & (state_count() - 1);
    }

    double transition(std::uint32_t from, std::uint32_t to) const
    {
        double p = 0.0;
        for (int g : {1, -1})
            if (successor(from, g) == to)
                p += symbol_probability(from, g);
        return p;
    }

    /// Closed communicating classes, each sorted ascending.
    const std::vector<std::vector<std::uint32_t>>& recurrent_classes() const { return classes_; }
    const std::vector<int>& class_periods() const { return periods_; }

    /// Extremal compatible laws carried by the recurrent structure: a class
    /// of period d splits into d phase-locked laws.
    std::size_t compatible_law_count() const
    {
        return static_cast<std::size_t>(std::accumulate(periods_.begin(), periods_.end(), 0));
    }

private:
    void for_each_successor(std::uint32_t h, auto&& f) const
    {
        if (plus_[h] > 0.0)
            f(successor(h, 1));
        if (plus_[h] < 1.0)
            f(successor(h, -1));
    }

    // Iterative Tarjan; closed components become recurrent classes.
    void find_recurrent_classes()
    {
        const std::uint32_t n = state_count();
        constexpr std::int64_t unvisited = -1;
        std::vector<std::int64_t> index(n, unvisited), low(n, 0);
        std::vector<std::int64_t> component(n, -1);
        std::vector<char> on_stack(n, 0);
        std::vector<std::uint32_t> stack;
        std::vector<std::vector<std::uint32_t>> components;
        struct Frame {
            std::uint32_t node;
            int next_edge;
        };
        std::int64_t counter = 0;
        for (std::uint32_t start = 0; start < n; ++start) {
            if (index[start] != unvisited)
                continue;
            std::vector<Frame> call{{start, 0}};
            index[start] = low[start] = counter++;
            stack.push_back(start);
            on_stack[start] = 1;
            while (!call.empty()) {
                Frame& fr = call.back();
                const std::uint32_t v = fr.node;
                std::uint32_t succ[2];
                int deg = 0;
                for_each_successor(v, [&](std::uint32_t w) { succ[deg++] = w; });
                if (fr.next_edge < deg) {
                    const std::uint32_t w = succ[fr.next_edge++];
                    if (index[w] == unvisited) {
                        index[w] = low[w] = counter++;
                        stack.push_back(w);
                        on_stack[w] = 1;
                        call.push_back({w, 0});
                    } else if (on_stack[w]) {
                        low[v] = std::min(low[v], index[w]);
                    }
                    continue;
                }
                if (low[v] == index[v]) {
                    std::vector<std::uint32_t> comp;
                    std::uint32_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        component[w] = static_cast<std::int64_t>(components.size());
                        comp.push_back(w);
                    } while (w != v);
                    components.push_back(std::move(comp));
                }
                call.pop_back();
                if (!call.empty()) {
                    const std::uint32_t parent = call.back().node;
                    low[parent] = std::min(low[parent], low[v]);
                }
            }
        }
        for (auto& comp : components) {
            const auto id = component[comp.front()];
            bool closed = true;
            for (std::uint32_t v : comp)
                for_each_successor(v, [&](std::uint32_t w) { closed = closed && component[w] == id; });
            if (!closed)
                continue;
            std::sort(comp.begin(), comp.end());
            periods_.push_back(period_of(comp, component, id));
            classes_.push_back(std::move(comp));
        }
    }

    int period_of(const std::vector<std::uint32_t>& comp, const std::vector<std::int64_t>& component,
                  std::int64_t id) const
    {
        std::vector<std::int64_t> level(state_count(), -1);
        std::vector<std::uint32_t> queue{comp.front()};
        level[comp.front()] = 0;
        std::int64_t g = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::uint32_t v = queue[head];
            for_each_successor(v, [&](std::uint32_t w) {
                if (component[w] != id)
                    return;
                if (level[w] < 0) {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                } else {
                    g = std::gcd(g, std::abs(level[v] + 1 - level[w]));
                }
            });
        }
        return static_cast<int>(g == 0 ? 1 : g);
    }

    int memory_ = 0;
    std::vector<double> plus_;
    std::vector<std::vector<std::uint32_t>> classes_;
    std::vector<int> periods_;
};

inline MarkovOracle build_oracle(const CoefficientModel& model)
{
    return MarkovOracle(model);
}

/**
 * One stationary distribution per recurrent class, each a full-length
 * vector over the 2^m histories. Dense LU up to memory 10; power iteration
 * on the lazy chain (P + I)/2 above that.
 */
inline std::vector<std::vector<double>> stationary_distributions(const MarkovOracle& oracle)
{
    std::vector<std::vector<double>> out;
    const std::uint32_t n = oracle.state_count();
    for (const auto& cls : oracle.recurrent_classes()) {
        const auto c = static_cast<Eigen::Index>(cls.size());
        std::vector<double> pi(n, 0.0);
        if (oracle.memory() <= 10) {
            Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(c, c);
            for (Eigen::Index i = 0; i < c; ++i)
                for (int g : {1, -1}) {
                    const double p = oracle.symbol_probability(cls[static_cast<std::size_t>(i)], g);
                    if (p == 0.0)
                        continue;
                    const auto to = oracle.successor(cls[static_cast<std::size_t>(i)], g);
                    const auto j = std::lower_bound(cls.begin(), cls.end(), to) - cls.begin();
                    a(j, i) += p; // (P^T - I)
                }
            a.row(c - 1).setOnes();
            Eigen::VectorXd b = Eigen::VectorXd::Zero(c);
            b(c - 1) = 1.0;
            const Eigen::VectorXd x = a.fullPivLu().solve(b);
            for (Eigen::Index i = 0; i < c; ++i)
                pi[cls[static_cast<std::size_t>(i)]] = x(i);
        } else {
            for (auto h : cls)
                pi[h] = 1.0 / static_cast<double>(cls.size());
            std::vector<double> next(n, 0.0);
            for (int iter = 0; iter < 1'000'000; ++iter) {
                for (auto h : cls)
                    next[h] = 0.5 * pi[h];
                for (auto h : cls)
                    for (int g : {1, -1})
                        next[oracle.successor(h, g)] += 0.5 * pi[h] * oracle.symbol_probability(h, g);
                double change = 0.0;
                for (auto h : cls)
                    change += std::abs(next[h] - pi[h]);
                for (auto h : cls)
                    pi[h] = next[h];
                if (change < 1e-12)
                    break;
            }
        }
        out.push_back(std::move(pi));
    }
    return out;
}

/// Largest window the exact law is tabulated for.
inline constexpr int max_exact_window = 22;

/// Law of w consecutive symbols of the chain started (and stationary) at @p pi.
inline std::vector<double> exact_window_law(const MarkovOracle& oracle, const std::vector<double>& pi,
                                            int w)
{
    const int m = oracle.memory();
    if (pi.size() != oracle.state_count())
        throw std::invalid_argument("distribution size does not match the oracle");
    if (w < 1 || w > m + 10)
        throw std::invalid_argument("window length must lie in [1, m + 10]");
    if (w > max_exact_window)
        throw EnumerationTooLarge("window law of length " + std::to_string(w) + " too large");
    std::vector<double> law(std::size_t{1} << w, 0.0);
    if (w <= m) {
        const std::uint32_t mask = (std::uint32_t{1} << w) - 1;
        for (std::uint32_t h = 0; h < oracle.state_count(); ++h)
            law[h & mask] += pi[h];
        return law;
    }
    std::vector<double> cur(pi);
    const std::uint32_t hist_mask = oracle.state_count() - 1;
    for (int len = m; len < w; ++len) {
        std::vector<double> next(std::size_t{1} << (len + 1), 0.0);
        for (std::uint32_t s = 0; s < cur.size(); ++s) {
            if (cur[s] == 0.0)
                continue;
            for (int g : {1, -1})
                next[(s << 1) | (g < 0 ? 1u : 0u)] +=
                    cur[s] * oracle.symbol_probability(s & hist_mask, g);
        }
        cur = std::move(next);
    }
    return cur;
}

/// c_k = E[X_n X_{n-k}] under the stationary chain.
inline double exact_autocovariance(const MarkovOracle& oracle, const std::vector<double>& pi, int k)
{
    if (k == 0)
        return 1.0;
    const auto law = exact_window_law(oracle, pi, k + 1);
    double c = 0.0;
    for (std::uint32_t x = 0; x < law.size(); ++x)
        c += law[x] * packed_symbol(x, k) * packed_symbol(x, 0);
    return c;
}

/// Largest number of sites the boundary recursion may tabulate.
inline constexpr std::int64_t max_boundary_sites = 10'000'000;

/**
 * Exact P(X_site = +1) for the process frozen to @p boundary left of -n.
 * Summing over all lag paths is organized by landing site:
 * E[X_s] = w_{-(-n-s)} for s < -n and E[X_s] = sum_k theta_k E[X_{s-k}]
 * otherwise.
 */
inline double exact_boundary_law(const CoefficientModel& model, std::int64_t n,
                                 const BoundarySpec& boundary, std::int64_t site)
{
    if (!model.has_finite_support())
        throw std::invalid_argument("exact boundary law requires finite support");
    if (n < 0 || site < -n)
        throw std::invalid_argument("exact boundary law requires n >= 0 and site >= -n");
    const std::int64_t m = model.max_lag();
    const std::int64_t span = site + n + 1;
    if (span > max_boundary_sites)
        throw EnumerationTooLarge("boundary recursion over " + std::to_string(span) + " sites");
    // mean[i] = E[X_{-n-m+i}]
    std::vector<double> mean(static_cast<std::size_t>(span + m));
    for (std::int64_t i = 0; i < m; ++i)
        mean[static_cast<std::size_t>(i)] = boundary.value(m - i);
    for (std::int64_t i = m; i < span + m; ++i) {
        double e = 0.0;
        for (std::int64_t k = 1; k <= m; ++k)
            e += model.theta(k) * mean[static_cast<std::size_t>(i - k)];
        mean[static_cast<std::size_t>(i)] = e;
    }
    return 0.5 * (1.0 + mean.back());
}

} // namespace perfsamp

#endif // PERFSAMP_ORACLE_HPP
