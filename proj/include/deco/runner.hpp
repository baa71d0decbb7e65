#ifndef DECO_RUNNER_HPP
#define DECO_RUNNER_HPP

#include <filesystem>
#include <optional>

#include "deco/config.hpp"
#include "deco/io.hpp"
#include "deco/stochastic_oracle.hpp"

namespace deco::run {

struct RunResult {
    int exit_code = 0;
    std::string error;
    std::vector<std::string> outputs;
    cfg::json summary;
};

/// Executes a parsed config: writes CSV series plus a JSON summary into the
/// output directory and returns the produced file list. Exit codes: 0 ok,
/// 2 validation error, 3 numerical refusal.
RunResult run_config(const cfg::json& config, std::optional<std::filesystem::path> out_dir = std::nullopt,
                     std::optional<uint64_t> seed_override = std::nullopt, Exec exec = Exec::parallel);

/// Emits the dataset for one of the built-in figure parameter sets
/// (fig2..fig6). Throws ConfigError for unknown names.
RunResult emit_figure(const std::string& name, const std::filesystem::path& out_dir, Exec exec = Exec::parallel);

// CSV emission helpers shared with the figure recipes.
void write_history_csv(const std::filesystem::path& path, const io::Manifest& m,
                       const decay::DecoherenceHistory& h, int stride);
void write_jmatrix_csv(const std::filesystem::path& path, const io::Manifest& m,
                       const decay::DecoherenceHistory& h, int stride);

}  // namespace deco::run

#endif
