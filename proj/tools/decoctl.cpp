#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "deco/runner.hpp"

namespace {

std::optional<uint64_t> seed_from_env() {
    const char* env = std::getenv("DECOCTL_SEED");
    if (!env || !*env) return std::nullopt;
    try {
        return std::stoull(env);
    } catch (...) {
        throw deco::ConfigError("DECOCTL_SEED must be an unsigned integer");
    }
}

int finish(const deco::run::RunResult& rr) {
    if (rr.exit_code != 0) {
        std::cerr << "error: " << rr.error << "\n";
    } else {
        for (const auto& f : rr.outputs) std::cout << f << "\n";
    }
    return rr.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decoctl - dynamically controlled decoherence simulator"};
    app.require_subcommand(1);

    std::string config_path, figure_name, out_dir;
    bool serial = false;
    app.add_flag("--serial", serial, "run the serial reference kernels instead of the OpenMP ones");

    auto* run_cmd = app.add_subcommand("run", "run a scenario config (decay/dephasing/optimize/steer/sweep/oracle)");
    run_cmd->add_option("config", config_path, "config file (JSON or TOML)")->required();
    run_cmd->add_option("--out", out_dir, "output directory override");

    auto* fig_cmd = app.add_subcommand("figure", "emit a built-in figure dataset (fig2..fig6)");
    fig_cmd->add_option("name", figure_name, "figure name")->required();
    fig_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* oracle_cmd = app.add_subcommand("oracle", "run the independent-oracle comparison for a config");
    oracle_cmd->add_option("config", config_path, "config file (JSON or TOML)")->required();
    oracle_cmd->add_option("--out", out_dir, "output directory override");

    auto* opt_cmd = app.add_subcommand("optimize", "run the modulation optimizer for a config");
    opt_cmd->add_option("config", config_path, "config file (JSON or TOML)")->required();
    opt_cmd->add_option("--out", out_dir, "output directory override");

    CLI11_PARSE(app, argc, argv);
    deco::Exec exec = serial ? deco::Exec::serial : deco::Exec::parallel;

    try {
        std::optional<std::filesystem::path> out;
        if (!out_dir.empty()) out = out_dir;
        if (fig_cmd->parsed()) return finish(deco::run::emit_figure(figure_name, out.value_or("out"), exec));

        auto config = deco::cfg::load_config_file(config_path);
        if (oracle_cmd->parsed() && config.value("mode", "") != "oracle") config["mode"] = "oracle";
        if (opt_cmd->parsed()) {
            std::string mode = config.value("mode", "");
            if (mode != "optimize" && mode != "steer") config["mode"] = "optimize";
        }
        return finish(deco::run::run_config(config, out, seed_from_env(), exec));
    } catch (const deco::ConfigError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const deco::NumericalRefusal& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
