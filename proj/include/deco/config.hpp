#ifndef DECO_CONFIG_HPP
#define DECO_CONFIG_HPP

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "deco/optimizer.hpp"
#include "deco/scenario.hpp"

namespace deco::cfg {

using json = nlohmann::ordered_json;

/// Parses JSON or the flat TOML subset (tables, key = value, nested arrays).
json parse_config_text(const std::string& text);
json load_config_file(const std::filesystem::path& path);

struct OracleParams {
    int realizations = 2000;
    uint64_t seed = 20260808;
    std::vector<double> times{1.0, 2.0, 5.0};
};

struct OutputParams {
    std::string dir = "out";
    std::string prefix;
    int stride = 1;
};

/// A schema-validated configuration with every default echoed back into
/// `effective` (the hash source) and the scenario objects built.
struct ParsedConfig {
    std::string mode;
    json effective;
    std::string config_hash;
    uint64_t seed = 0;

    std::optional<DecayScenario> decay;
    std::optional<DephasingScenario> dephasing;
    std::optional<opt::OptimizationProblem> problem;
    std::vector<double> sweep_powers;
    opt::SweepOptions sweep_options;
    OracleParams oracle;
    OutputParams output;
};

/// Validates (unknown keys rejected, every diagnostic names the offending
/// key) and builds the scenarios. `seed_override` implements DECOCTL_SEED:
/// it is folded into the effective config before hashing.
ParsedConfig build_config(const json& config, std::optional<uint64_t> seed_override = std::nullopt);

}  // namespace deco::cfg

#endif
