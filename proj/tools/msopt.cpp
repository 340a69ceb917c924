#include "msopt/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace msopt;

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output;
    bool paper_verbatim = false;
};

RunConfig resolve(const Options& o) {
    nlohmann::json tree = to_json(RunConfig{});
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("config", "cannot open " + o.config_path);
        try {
            tree = nlohmann::json::parse(in, nullptr, true, true);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config", o.config_path + ": " + e.what());
        }
        // Shape and mesh paths are relative to the config file.
        const fs::path base = fs::path(o.config_path).parent_path();
        for (const auto& [section, key] : {std::pair{"shapes", "manifest"}, std::pair{"mesh", "file"}})
            if (tree.contains(section) && tree[section].contains(key) && tree[section][key].is_string()) {
                const std::string p = tree[section][key];
                if (!p.empty() && fs::path(p).is_relative()) tree[section][key] = (base / p).string();
            }
    }
    if (o.paper_verbatim) apply_override(tree, "algorithm.variant=\"paper-verbatim\"");
    for (const std::string& s : o.overrides) apply_override(tree, s);
    RunConfig c = config_from_json(tree);
    if (const char* env = std::getenv("MSOPT_OUTPUT_DIR"); env && *env) c.output_dir = env;
    if (!o.output.empty()) c.output_dir = o.output;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shape optimization of obstacles in Navier-Stokes flow under uncertain inflow"};
    app.require_subcommand(1);
    Options opt;
    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opt.config_path, "JSON configuration file");
        sub->add_option("-s,--set", opt.overrides, "Override a config key, e.g. algorithm.tau=0.8")->take_all();
        sub->add_option("-o,--output", opt.output, "Output directory (overrides config and MSOPT_OUTPUT_DIR)");
        sub->add_flag("--paper-verbatim", opt.paper_verbatim, "Use the literal min-form multiplier formulas");
    };

    CLI::App* mesh = app.add_subcommand("mesh", "Generate the benchmark mesh and shape files");
    common(mesh);

    CLI::App* solve = app.add_subcommand("solve", "Solve the flow for one inflow sample");
    common(solve);
    std::string xi = "0";
    solve->add_option("--xi", xi, "Sample: -1, 0, 1 (all coefficients) or a CSV file");

    CLI::App* optimize = app.add_subcommand("optimize", "Run the stochastic augmented Lagrangian method");
    common(optimize);
    bool deterministic = false, resume = false;
    optimize->add_flag("--deterministic", deterministic, "Mean-inflow baseline with Armijo steps");
    optimize->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");

    CLI::App* lipschitz = app.add_subcommand("estimate-lipschitz", "Estimate the Lipschitz constants");
    common(lipschitz);
    std::string from_csv;
    lipschitz->add_option("--from-csv", from_csv, "Fit recorded (mu, min_step) pairs instead of running");

    CLI::App* plot = app.add_subcommand("plot", "Render PNG plots from run artifacts");
    std::string run_dir, plot_out;
    plot->add_option("run_dir", run_dir, "Directory with run_log.csv / trajectory.csv")->required();
    plot->add_option("-o,--output", plot_out, "Image directory (default: run_dir)");

    CLI::App* show = app.add_subcommand("config", "Print the resolved configuration");
    common(show);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    fs::path out = opt.output.empty() ? fs::path("out") : fs::path(opt.output);
    try {
        if (plot->parsed()) {
            out = plot_out.empty() ? fs::path(run_dir) : fs::path(plot_out);
            for (const auto& p : cmd_plot(run_dir, out)) std::cout << p.string() << '\n';
            return 0;
        }
        const RunConfig config = resolve(opt);
        out = config.output_dir;
        if (show->parsed()) {
            std::cout << to_json(config).dump(2) << '\n';
            return 0;
        }
        const std::string name = app.get_subcommands().front()->get_name();
        write_manifest(config, deterministic ? "optimize --deterministic" : name, out);
        if (mesh->parsed()) cmd_mesh(config, out);
        if (solve->parsed()) cmd_solve(config, parse_xi(xi), out);
        if (optimize->parsed()) {
            if (deterministic)
                cmd_optimize_deterministic(config, out);
            else
                cmd_optimize(config, out, resume);
        }
        if (lipschitz->parsed())
            cmd_estimate_lipschitz(config, out, from_csv.empty() ? std::nullopt : std::optional<fs::path>(from_csv));
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        write_error_record(out, 2, "config", e.what(), e.field());
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        write_error_record(out, 3, "solver", e.what());
        return 3;
    } catch (const MeshError& e) {
        std::cerr << "mesh failure: " << e.what() << '\n';
        write_error_record(out, 4, "mesh", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        write_error_record(out, 1, "error", e.what());
        return 1;
    }
}
