#ifndef DECO_IO_HPP
#define DECO_IO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "deco/types.hpp"

#define DECO_VERSION "0.1.0"

namespace deco::io {

uint64_t fnv1a64(std::string_view s);
std::string fnv1a64_hex(std::string_view s);

/// Run provenance attached to every output file.
struct Manifest {
    std::string config_hash;
    std::string version = DECO_VERSION;
    uint64_t seed = 0;
    std::string phase_convention = "printed";
    std::string sign_convention = "formula";
    std::string rng_algorithm;
    std::string timestamp;  // not part of the hash

    nlohmann::json to_json() const;
    /// The deterministic part written into CSV headers.
    std::string reference_line() const;
};

std::string iso_timestamp();

/// CSV writer: one `# manifest=...` reference line, a header row, then
/// numeric rows serialized with %.17g (bit-stable round trips).
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const Manifest& manifest);
    void header(const std::vector<std::string>& columns);
    void row(std::span<const double> values);
    void close();
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
    size_t columns_ = 0;
};

std::string format_double(double v);

}  // namespace deco::io

#endif
