// perfsamp: command-line front end for the perfect-sampling toolkit.
//
//   perfsamp <command> --config run.json [--seed N] [--length L] [--replicas R]
//            [--guard G] [--output PATH] [--format jsonl|csv] [command options]
//
// Flags override the config file, which overrides PERFSAMP_SEED.

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perfsamp/cli.hpp"

namespace {

using namespace perfsamp::cli;

struct Flags {
    std::string config_path;
    std::string model_json;
    std::string seed;
    std::int64_t length = 0;
    std::int64_t replicas = 0;
    std::int64_t guard = 0;
    std::string output;
    std::string format;
    // command-specific; unset options leave the config value alone
    std::map<std::string, CLI::Option*> given;
    std::int64_t y0 = 0;
    std::int64_t max_steps = 0;
    int window = 0;
    std::vector<std::int64_t> n_list;
    std::int64_t site = 0;
    std::string boundary;
    double threshold = 0.0;
};

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config_path, "JSON run configuration");
    cmd->add_option("--model", f.model_json, "inline JSON model record (overrides the config's)");
    cmd->add_option("--seed", f.seed, "master seed (unsigned 64-bit)");
    cmd->add_option("--length", f.length, "window length L");
    cmd->add_option("--replicas", f.replicas, "number of replicas / walks");
    cmd->add_option("--guard", f.guard, "max lag draws per simulation run");
    cmd->add_option("--output", f.output, "output path, '-' for stdout");
    cmd->add_option("--format", f.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
}

void add_specific(CLI::App* cmd, const std::string& name, Flags& f)
{
    auto keep = [&](const std::string& key, CLI::Option* opt) { f.given[name + key] = opt; };
    if (name == "vonschelling") {
        keep("y0", cmd->add_option("--y0", f.y0, "starting height of the walk"));
        keep("max_steps", cmd->add_option("--max-steps", f.max_steps, "censoring horizon per walk"));
    }
    if (name == "boundary") {
        keep("n", cmd->add_option("--n", f.n_list, "boundary distances n")->delimiter(','));
        keep("site", cmd->add_option("--site", f.site, "observed site (>= -n)"));
        keep("boundary", cmd->add_option("--boundary", f.boundary,
                                         "plus, minus or a JSON list such as [1,-1]"));
    }
    if (name == "oracle" || name == "compare")
        keep("window", cmd->add_option("--window", f.window, "window width (default: memory)"));
    if (name == "compare")
        keep("threshold", cmd->add_option("--threshold", f.threshold, "TV pass threshold"));
}

RunConfig resolve(const Flags& f, const std::string& name)
{
    auto set = [&](const std::string& key) {
        const auto it = f.given.find(name + key);
        return it != f.given.end() && it->second->count() > 0;
    };
    RunConfig c = f.config_path.empty() ? parse_config(json::object()) : load_config_file(f.config_path);
    if (!f.model_json.empty()) {
        try {
            c.model_record = json::parse(f.model_json);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("--model is not valid JSON: ") + e.what());
        }
    }
    if (!f.seed.empty())
        c.seed = parse_seed(f.seed);
    if (f.length)
        c.length = f.length;
    if (f.replicas)
        c.replicas = f.replicas;
    if (f.guard)
        c.guard = f.guard;
    if (!f.output.empty())
        c.output = f.output;
    if (!f.format.empty())
        c.format = f.format;
    if (set("y0"))
        c.y0 = f.y0;
    if (set("max_steps"))
        c.max_steps = f.max_steps;
    if (set("window"))
        c.window = f.window;
    if (set("n"))
        c.n_list = f.n_list;
    if (set("site"))
        c.site = f.site;
    if (set("boundary")) {
        if (f.boundary == "plus" || f.boundary == "minus") {
            c.boundary = f.boundary;
        } else {
            try {
                c.boundary = json::parse(f.boundary);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("--boundary is not plus, minus or a JSON list: ") + e.what());
            }
        }
    }
    if (set("threshold"))
        c.threshold = f.threshold;
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Perfect sampling for binary linear kernels with infinite memory"};
    app.require_subcommand(1);

    using Command = std::function<int(const RunConfig&, std::ostream&, std::ostream&)>;
    const std::map<std::string, std::pair<std::string, Command>> commands = {
        {"validate", {"check a model record", cmd_validate}},
        {"classify", {"uniqueness verdict with evidence", cmd_classify}},
        {"simulate", {"exact windows, one record per replica", cmd_simulate}},
        {"vonschelling", {"hitting times of the reflected walk", cmd_vonschelling}},
        {"boundary", {"boundary-conditioned marginals d(n)", cmd_boundary}},
        {"oracle", {"exact Markov oracle for finite support", cmd_oracle}},
        {"compare", {"TV distance of simulated vs exact window law", cmd_compare}},
    };

    Flags flags;
    for (const auto& [name, entry] : commands) {
        auto* cmd = app.add_subcommand(name, entry.first);
        add_common(cmd, flags);
        add_specific(cmd, name, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    RunConfig config;
    try {
        config = resolve(flags, name);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }

    if (config.output == "-")
        return commands.at(name).second(config, std::cout, std::cerr);
    std::ofstream out(config.output, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open output '" << config.output << "'\n";
        return exit_config;
    }
    return commands.at(name).second(config, out, std::cerr);
}
