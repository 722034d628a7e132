#ifndef PERFSAMP_CLI_HPP
#define PERFSAMP_CLI_HPP

/** @file
 * Experiment configuration and the command implementations behind the
 * perfsamp executable. Each command writes its report to @c out,
 * diagnostics to @c err, and returns the process exit code:
 *
 *   0  success, every internal check passed
 *   1  a statistical check failed (compare)
 *   2  invalid configuration or model
 *   3  a replica exceeded its draw guard (simulate)
 *   4  oracle memory or enumeration limits exceeded
 */

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coefficients.hpp"
#include "engine.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "walks.hpp"

namespace perfsamp::cli {

using json = nlohmann::json;

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_config = 2,
    exit_guard = 3,
    exit_limits = 4,
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Environment variable consulted for the master seed when neither the
/// flag nor the config file provides one.
inline constexpr const char* seed_env_var = "PERFSAMP_SEED";

struct ModelConfig {
    CoefficientModel base;
    std::optional<BiasedModel> biased;
};

inline SignPattern parse_signs(const json& j)
{
    if (!j.is_array())
        throw ConfigError("'signs' must be a list of \"+\"/\"-\"");
    std::vector<int> signs;
    for (const auto& s : j) {
        const std::string v = s.is_string() ? s.get<std::string>() : std::string{};
        if (v == "+")
            signs.push_back(1);
        else if (v == "-" || v == "\xE2\x88\x92")
            signs.push_back(-1);
        else
            throw ConfigError("sign entries must be \"+\" or \"-\"");
    }
    return SignPattern(std::move(signs));
}

/**
 * Model record: {"type": "finite"|"geometric"|"powerlaw", "coeffs": [...],
 * "q": x, "alpha": x, "signs": ["+","-",...], "bias": theta_0,
 * "lag_mass": r_0}. A nonzero bias scales the base family by
 * r_0 = 1 - |theta_0| unless lag_mass is given explicitly.
 */
inline ModelConfig parse_model(const json& j)
{
    if (!j.is_object())
        throw ConfigError("model must be an object");
    const std::string type = j.value("type", std::string{});
    auto number = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw ConfigError(std::string("model of type '") + type + "' needs numeric '" + key + "'");
        return j.at(key).get<double>();
    };
    auto signs = [&] { return j.contains("signs") ? parse_signs(j.at("signs")) : SignPattern{}; };

    std::optional<CoefficientModel> base;
    if (type == "finite") {
        if (!j.contains("coeffs") || !j.at("coeffs").is_array())
            throw ConfigError("finite model needs a 'coeffs' list");
        std::vector<double> coeffs;
        for (const auto& c : j.at("coeffs")) {
            if (!c.is_number())
                throw ConfigError("'coeffs' entries must be numbers");
            coeffs.push_back(c.get<double>());
        }
        base = CoefficientModel::finite(std::move(coeffs));
    } else if (type == "geometric") {
        base = CoefficientModel::geometric(number("q"), signs());
    } else if (type == "powerlaw") {
        base = CoefficientModel::power_law(number("alpha"), signs());
    } else {
        throw ConfigError("model 'type' must be finite, geometric or powerlaw");
    }

    ModelConfig out{*base, std::nullopt};
    const bool has_bias = j.contains("bias");
    const bool has_mass = j.contains("lag_mass");
    if (has_bias || has_mass) {
        const double theta0 = has_bias ? number("bias") : 0.0;
        const double r0 = has_mass ? number("lag_mass") : 1.0 - std::abs(theta0);
        if (r0 < 1.0)
            out.biased.emplace(*base, r0, theta0);
    }
    return out;
}

struct RunConfig {
    json model_record;
    std::optional<std::uint64_t> seed;
    std::int64_t length = 2;
    std::int64_t replicas = 1000;
    std::int64_t guard = default_max_draws;
    std::int64_t y0 = 1;
    std::int64_t max_steps = 1'000'000;
    int window = 0; ///< 0: the model's memory
    std::vector<std::int64_t> n_list{2, 8, 32};
    std::int64_t site = 0;
    json boundary = "plus";
    double threshold = 0.02;
    std::string output = "-";
    /// "jsonl" or "csv"; empty selects each command's default.
    std::string format;

    /// simulate and the experiment reports default to JSONL.
    std::string record_format() const { return format.empty() ? "jsonl" : format; }
};

inline std::uint64_t parse_seed(const std::string& text)
{
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used, 0);
    } catch (const std::exception&) {
        throw ConfigError("seed '" + text + "' is not an unsigned 64-bit integer");
    }
    if (used != text.size())
        throw ConfigError("seed '" + text + "' is not an unsigned 64-bit integer");
    return v;
}

/// Reads the config record; the env seed applies only if the record has none.
inline RunConfig parse_config(const json& j, const char* env_seed = std::getenv(seed_env_var))
{
    if (!j.is_object())
        throw ConfigError("config must be an object");
    RunConfig c;
    try {
        if (j.contains("model"))
            c.model_record = j.at("model");
        if (j.contains("seed"))
            c.seed = j.at("seed").is_string() ? parse_seed(j.at("seed").get<std::string>())
                                              : j.at("seed").get<std::uint64_t>();
        else if (env_seed && *env_seed)
            c.seed = parse_seed(env_seed);
        c.length = j.value("length", c.length);
        c.replicas = j.value("replicas", c.replicas);
        c.guard = j.value("guard", c.guard);
        c.y0 = j.value("y0", c.y0);
        c.max_steps = j.value("max_steps", c.max_steps);
        c.window = j.value("window", c.window);
        if (j.contains("n"))
            c.n_list = j.at("n").get<std::vector<std::int64_t>>();
        c.site = j.value("site", c.site);
        if (j.contains("boundary"))
            c.boundary = j.at("boundary");
        c.threshold = j.value("threshold", c.threshold);
        c.output = j.value("output", c.output);
        c.format = j.value("format", c.format);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

inline void check_run_config(const RunConfig& c)
{
    if (!c.seed)
        throw ConfigError(std::string("no seed given (use --seed, a 'seed' entry or ") +
                          seed_env_var + ")");
    if (c.replicas < 1)
        throw ConfigError("replicas must be >= 1");
    if (c.length < 1)
        throw ConfigError("length must be >= 1");
    if (c.guard < 1 || c.max_steps < 1)
        throw ConfigError("guard and max_steps must be >= 1");
    if (!c.format.empty() && c.format != "jsonl" && c.format != "csv")
        throw ConfigError("format must be jsonl or csv");
}

inline ModelConfig require_model(const RunConfig& c)
{
    if (c.model_record.is_null())
        throw ConfigError("config has no 'model' record");
    return parse_model(c.model_record);
}

inline BoundarySpec parse_boundary(const json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "plus")
            return BoundarySpec::all_plus();
        if (s == "minus")
            return BoundarySpec::all_minus();
        throw ConfigError("boundary must be \"plus\", \"minus\" or a list of +1/-1");
    }
    try {
        return BoundarySpec::periodic(j.get<std::vector<int>>());
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid boundary pattern: ") + e.what());
    }
}

/// "+-+" rendering of a packed history or window of @p width symbols.
inline std::string render_packed(std::uint32_t packed, int width)
{
    std::string s;
    for (int b = width - 1; b >= 0; --b)
        s += packed_symbol(packed, b) > 0 ? '+' : '-';
    return s;
}

// ---------------------------------------------------------------------------

namespace detail {

/// Runs @p body, mapping the error families onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const ModelError& e) {
        err << "invalid model: " << e.what() << '\n';
        return exit_config;
    } catch (const MemoryTooLarge& e) {
        err << "oracle limit: " << e.what() << '\n';
        return exit_limits;
    } catch (const EnumerationTooLarge& e) {
        err << "oracle limit: " << e.what() << '\n';
        return exit_limits;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
}

inline void require_finite(const ModelConfig& m, const char* command)
{
    if (m.biased || !m.base.has_finite_support())
        throw ConfigError(std::string(command) + " requires an unbiased finite-support model");
}

} // namespace detail

inline int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const auto m = require_model(config);
        validate(m.base);
        out << "valid: " << m.base.describe();
        if (m.biased)
            out << " with bias theta_0=" << m.biased->bias << ", r_0=" << m.biased->lag_mass;
        out << '\n';
        return exit_ok;
    });
}

inline json verdict_json(const ClassificationVerdict& v)
{
    json j{{"verdict", to_string(v.kind)},
           {"summary", v.headline()},
           {"gcd", v.gcd},
           {"condition_ii", v.sign_condition.holds},
           {"condition_ii_evidence", v.sign_condition.describe()},
           {"condition_iii", v.tail_condition},
           {"condition_iii_evidence", v.tail_evidence()}};
    if (v.reduced)
        j["reduced"] = verdict_json(*v.reduced);
    return j;
}

inline int cmd_classify(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const auto m = require_model(config);
        if (m.biased) {
            if (config.format == "jsonl")
                out << json{{"verdict", "Unique"},
                            {"summary", "Unique (biased kernel, r_0 < 1)"},
                            {"lag_mass", m.biased->lag_mass},
                            {"bias", m.biased->bias}}
                           .dump()
                    << '\n';
            else
                out << "Unique (biased kernel: r_0=" << m.biased->lag_mass << " < 1)\n";
            return exit_ok;
        }
        const auto v = classify(m.base);
        if (config.format == "jsonl") {
            out << verdict_json(v).dump() << '\n';
            return exit_ok;
        }
        out << v.headline() << '\n';
        out << "  i: gcd=" << v.gcd << '\n';
        out << "  ii: " << (v.sign_condition.holds ? "holds, " : "fails, ")
            << v.sign_condition.describe() << '\n';
        out << "  iii: " << (v.tail_condition ? "holds, " : "fails, ") << v.tail_evidence() << '\n';
        if (v.reduced)
            out << "  reduced model (theta*_k = theta_{" << v.gcd << "k}): " << v.reduced->headline()
                << '\n';
        return exit_ok;
    });
}

/**
 * One exact window per replica. Replica i uses the stream seeded with
 * stream_seed(master seed, i); records are written in replica order.
 */
inline int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        check_run_config(config);
        const auto m = require_model(config);
        if (!m.biased) {
            if (const auto v = classify(m.base); !v.is_unique())
                err << "warning: model is not certified unique (" << v.headline()
                    << "); samples follow the coalescence construction if it terminates\n";
        }
        const bool csv = config.record_format() == "csv";
        if (csv) {
            out << "replica,seed,draws";
            for (std::int64_t i = 1; i <= config.length; ++i)
                out << ",x" << i;
            out << '\n';
        }
        for (std::int64_t r = 0; r < config.replicas; ++r) {
            const std::uint64_t seed = stream_seed(*config.seed, static_cast<std::uint64_t>(r));
            SampleWindow w;
            try {
                w = m.biased ? perfect_simulate_biased(*m.biased, config.length, seed, config.guard)
                             : perfect_simulate(m.base, config.length, seed, config.guard);
            } catch (const GuardExceeded& e) {
                if (!csv)
                    out << json{{"replica", r},
                                {"seed", seed},
                                {"error", "GuardExceeded"},
                                {"draws", e.max_draws},
                                {"active", e.active_remaining}}
                               .dump()
                        << '\n';
                err << "replica " << r << ": " << e.what()
                    << " (suspected non-coalescence: transient walk or gcd > 1)\n";
                return exit_guard;
            }
            if (!csv) {
                out << json{{"replica", r}, {"seed", seed}, {"window", w.values}, {"draws", w.draws}}
                           .dump()
                    << '\n';
            } else {
                out << r << ',' << seed << ',' << w.draws;
                for (int v : w.values)
                    out << ',' << v;
                out << '\n';
            }
        }
        return exit_ok;
    });
}

inline int cmd_vonschelling(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        check_run_config(config);
        const auto m = require_model(config);
        if (m.biased)
            throw ConfigError("vonschelling requires an unbiased model");
        if (config.y0 < 1)
            throw ConfigError("y0 must be >= 1");
        std::vector<std::int64_t> times;
        std::int64_t censored = 0;
        double sum = 0.0;
        for (std::int64_t r = 0; r < config.replicas; ++r) {
            auto rng = make_stream(*config.seed, static_cast<std::uint64_t>(r));
            const auto t = hitting_time(m.base, config.y0, config.max_steps, rng);
            if (t.hit_zero) {
                times.push_back(t.steps);
                sum += static_cast<double>(t.steps);
            } else {
                ++censored;
            }
        }
        std::sort(times.begin(), times.end());
        json quantiles = json::object();
        for (double q : {0.5, 0.9, 0.99}) {
            // censored walks count as +infinity
            const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(config.replicas))) - 1;
            std::ostringstream key;
            key << q;
            quantiles[key.str()] = idx < times.size() ? json(times[idx]) : json(nullptr);
        }
        out << json{{"command", "vonschelling"},
                    {"model", m.base.describe()},
                    {"y0", config.y0},
                    {"max_steps", config.max_steps},
                    {"walks", config.replicas},
                    {"hit", times.size()},
                    {"censored", censored},
                    {"mean_hitting_time_of_hits",
                     times.empty() ? json(nullptr) : json(sum / static_cast<double>(times.size()))},
                    {"quantiles", quantiles}}
                   .dump()
            << '\n';
        return exit_ok;
    });
}

/**
 * d(n) = |P(X_site = +1) - 1/2| under the boundary condition, per n.
 * The stream for replica r at the i-th n is
 * stream_seed(stream_seed(master, i), r).
 */
inline int cmd_boundary(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        check_run_config(config);
        const auto m = require_model(config);
        if (m.biased)
            throw ConfigError("boundary requires an unbiased model");
        const auto boundary = parse_boundary(config.boundary);
        for (std::size_t i = 0; i < config.n_list.size(); ++i) {
            const std::int64_t n = config.n_list[i];
            if (n < 0 || config.site < -n)
                throw ConfigError("boundary needs n >= 0 and site >= -n");
            const std::uint64_t base_seed = stream_seed(*config.seed, i);
            std::size_t plus = 0;
            for (std::int64_t r = 0; r < config.replicas; ++r) {
                auto rng = make_stream(base_seed, static_cast<std::uint64_t>(r));
                plus += boundary_simulate(m.base, n, boundary, config.site, rng) > 0;
            }
            const auto est = proportion_estimate(plus, static_cast<std::size_t>(config.replicas));
            json rec{{"command", "boundary"},
                     {"n", n},
                     {"site", config.site},
                     {"replicas", config.replicas},
                     {"plus_probability", est.estimate},
                     {"std_error", est.std_error},
                     {"d", std::abs(est.estimate - 0.5)}};
            if (m.base.has_finite_support()) {
                try {
                    const double exact = exact_boundary_law(m.base, n, boundary, config.site);
                    rec["exact_plus_probability"] = exact;
                    rec["exact_d"] = std::abs(exact - 0.5);
                    rec["z"] = est.z_score(exact);
                } catch (const EnumerationTooLarge&) {
                    rec["exact_plus_probability"] = nullptr;
                }
            }
            out << rec.dump() << '\n';
        }
        return exit_ok;
    });
}

inline int cmd_oracle(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const auto m = require_model(config);
        detail::require_finite(m, "oracle");
        const auto oracle = build_oracle(m.base);
        const auto pis = stationary_distributions(oracle);
        const int w = config.window > 0 ? config.window : oracle.memory();
        json classes = json::array();
        for (std::size_t c = 0; c < pis.size(); ++c) {
            json states = json::array();
            for (auto h : oracle.recurrent_classes()[c])
                states.push_back(render_packed(h, oracle.memory()));
            json pi = json::object();
            for (std::uint32_t h = 0; h < oracle.state_count(); ++h)
                if (pis[c][h] > 0.0)
                    pi[render_packed(h, oracle.memory())] = pis[c][h];
            const auto law = exact_window_law(oracle, pis[c], w);
            json window = json::object();
            for (std::uint32_t x = 0; x < law.size(); ++x)
                window[render_packed(x, w)] = law[x];
            classes.push_back({{"states", states},
                               {"period", oracle.class_periods()[c]},
                               {"stationary", pi},
                               {"window_law", window}});
        }
        out << json{{"command", "oracle"},
                    {"model", m.base.describe()},
                    {"memory", oracle.memory()},
                    {"stationary_count", pis.size()},
                    {"compatible_law_count", oracle.compatible_law_count()},
                    {"window", w},
                    {"classes", classes}}
                   .dump()
            << '\n';
        return exit_ok;
    });
}

/// TV distance between the simulated window law and the oracle's exact law.
inline int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        check_run_config(config);
        const auto m = require_model(config);
        detail::require_finite(m, "compare");
        const auto oracle = build_oracle(m.base);
        const auto pis = stationary_distributions(oracle);
        if (pis.size() != 1) {
            err << "compare: oracle has " << pis.size()
                << " stationary distributions; no single target law\n";
            return exit_check_failed;
        }
        const int w = config.window > 0 ? config.window : oracle.memory();
        const auto exact = exact_window_law(oracle, pis.front(), w);
        std::vector<SampleWindow> windows;
        windows.reserve(static_cast<std::size_t>(config.replicas));
        for (std::int64_t r = 0; r < config.replicas; ++r) {
            const std::uint64_t seed = stream_seed(*config.seed, static_cast<std::uint64_t>(r));
            try {
                windows.push_back(perfect_simulate(m.base, w, seed, config.guard));
            } catch (const GuardExceeded& e) {
                err << "replica " << r << ": " << e.what() << '\n';
                return exit_guard;
            }
        }
        const auto emp = empirical_window_distribution(windows, w);
        const double tv = tv_distance(emp.frequency, exact);
        const bool pass = tv < config.threshold;
        json empirical = json::object(), exact_j = json::object();
        for (std::uint32_t x = 0; x < exact.size(); ++x) {
            empirical[render_packed(x, w)] = emp.frequency[x];
            exact_j[render_packed(x, w)] = exact[x];
        }
        out << json{{"command", "compare"},
                    {"model", m.base.describe()},
                    {"window", w},
                    {"replicas", config.replicas},
                    {"empirical", empirical},
                    {"exact", exact_j},
                    {"tv", tv},
                    {"threshold", config.threshold},
                    {"result", pass ? "PASS" : "FAIL"}}
                   .dump()
            << '\n';
        return pass ? exit_ok : exit_check_failed;
    });
}

} // namespace perfsamp::cli

#endif // PERFSAMP_CLI_HPP
