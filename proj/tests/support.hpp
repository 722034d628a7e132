// Test-only helpers: random model generators and brute-force oracles that
// share no code path with the library routines they check.
#ifndef PERFSAMP_TESTS_SUPPORT_HPP
#define PERFSAMP_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "perfsamp/perfsamp.hpp"

namespace perfsamp::check {

/// Random finite vector with support inside {1..max_lag}, gcd 1, random
/// signs and weights normalized to sum 1.
inline std::vector<double> random_gcd1_coefficients(std::mt19937_64& gen, int max_lag)
{
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (;;) {
        std::vector<double> theta(static_cast<std::size_t>(max_lag), 0.0);
        std::int64_t g = 0;
        for (int k = 1; k <= max_lag; ++k) {
            if (coin(gen)) {
                theta[static_cast<std::size_t>(k - 1)] = (coin(gen) ? 1.0 : -1.0) * weight(gen);
                g = std::gcd(g, static_cast<std::int64_t>(k));
            }
        }
        if (g != 1)
            continue;
        double total = 0.0;
        for (double t : theta)
            total += std::abs(t);
        for (double& t : theta)
            t /= total;
        return theta;
    }
}

/// Dense row-stochastic matrix of the history chain, built from the kernel
/// formula directly (states packed as in the oracle).
inline std::vector<std::vector<double>> dense_history_matrix(const std::vector<double>& theta)
{
    const int m = static_cast<int>(theta.size());
    const std::size_t n = std::size_t{1} << m;
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (std::size_t h = 0; h < n; ++h) {
        double s = 0.0;
        for (int k = 1; k <= m; ++k)
            s += theta[static_cast<std::size_t>(k - 1)] * (((h >> (k - 1)) & 1u) ? -1.0 : 1.0);
        const double plus = 0.5 + 0.5 * s;
        p[h][((h << 1) | 0u) & (n - 1)] += plus;
        p[h][((h << 1) | 1u) & (n - 1)] += 1.0 - plus;
    }
    return p;
}

/// Cesaro average of pi0 P^t over t < steps (converges for periodic chains too).
inline std::vector<double> cesaro_limit(const std::vector<std::vector<double>>& p,
                                        std::vector<double> pi, int steps)
{
    const std::size_t n = pi.size();
    std::vector<double> avg(n, 0.0);
    for (int t = 0; t < steps; ++t) {
        for (std::size_t i = 0; i < n; ++i)
            avg[i] += pi[i] / steps;
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                next[j] += pi[i] * p[i][j];
        pi = std::move(next);
    }
    return avg;
}

/**
 * Signs by the matrix route: Z has Z(i,i) = 1 only for the active particle,
 * Z(i, parent) = relative sign for frozen ones, and X = Z^L e_H root_sign.
 */
inline std::vector<int> matrix_power_signs(const ParticleSystem& sys, int root_sign)
{
    const std::size_t l = sys.size();
    using Mat = std::vector<std::vector<long long>>;
    Mat z(l, std::vector<long long>(l, 0));
    std::size_t root = l;
    for (std::size_t i = 0; i < l; ++i) {
        if (sys.active[i]) {
            z[i][i] = 1;
            root = i;
        } else {
            z[i][static_cast<std::size_t>(sys.parent[i])] = sys.relative_sign[i];
        }
    }
    auto mul = [&](const Mat& a, const Mat& b) {
        Mat c(l, std::vector<long long>(l, 0));
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t k = 0; k < l; ++k)
                if (a[i][k])
                    for (std::size_t j = 0; j < l; ++j)
                        c[i][j] += a[i][k] * b[k][j];
        return c;
    };
    Mat power(l, std::vector<long long>(l, 0));
    for (std::size_t i = 0; i < l; ++i)
        power[i][i] = 1;
    for (std::size_t t = 0; t < l; ++t)
        power = mul(power, z);
    std::vector<int> x(l);
    for (std::size_t i = 0; i < l; ++i)
        x[i] = static_cast<int>(power[i][root] * root_sign);
    return x;
}

/// Random coalescence forest on L particles with a single active root.
inline ParticleSystem random_coalescence_tree(std::mt19937_64& gen, std::size_t l)
{
    ParticleSystem sys(l);
    std::vector<std::size_t> order(l);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    std::bernoulli_distribution coin(0.5);
    // order[0] is the root; each later particle attaches to an earlier one
    for (std::size_t i = 1; i < l; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        const std::size_t child = order[i];
        sys.active[child] = 0;
        sys.parent[child] = static_cast<int>(order[pick(gen)]);
        sys.relative_sign[child] = coin(gen) ? 1 : -1;
    }
    return sys;
}

/// P(X_site = +1) under a boundary by recursive enumeration of every lag
/// sequence (exponential; small n only).
inline double enumerate_boundary_plus(const std::vector<double>& theta, std::int64_t n,
                                      const std::function<int(std::int64_t)>& boundary,
                                      std::int64_t site)
{
    std::function<double(std::int64_t, int)> walk = [&](std::int64_t pos, int sign) -> double {
        if (pos < -n)
            return sign * boundary(-n - pos) > 0 ? 1.0 : 0.0;
        double p = 0.0;
        for (std::size_t k = 1; k <= theta.size(); ++k) {
            const double t = theta[k - 1];
            if (t == 0.0)
                continue;
            p += std::abs(t) * walk(pos - static_cast<std::int64_t>(k), t > 0 ? sign : -sign);
        }
        return p;
    };
    return walk(site, 1);
}

} // namespace perfsamp::check

#endif // PERFSAMP_TESTS_SUPPORT_HPP
