#include "deco/io.hpp"

#include <chrono>
#include <cstdio>

namespace deco::io {

uint64_t fnv1a64(std::string_view s) {
    uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string fnv1a64_hex(std::string_view s) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

nlohmann::json Manifest::to_json() const {
    return {{"config_hash", config_hash}, {"version", version},
            {"seed", seed},               {"phase_convention", phase_convention},
            {"sign_convention", sign_convention}, {"rng_algorithm", rng_algorithm},
            {"timestamp", timestamp}};
}

std::string Manifest::reference_line() const {
    return "# manifest=" + config_hash + " version=" + version + " seed=" + std::to_string(seed) +
           " phase_convention=" + phase_convention;
}

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Manifest& manifest) : path_(path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    out_.open(path);
    if (!out_) throw ConfigError("cannot open output file " + path.string());
    out_ << manifest.reference_line() << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    columns_ = columns.size();
    for (size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) throw ConfigError("CSV row width mismatch in " + path_.string());
    for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
}

void CsvWriter::close() { out_.close(); }

}  // namespace deco::io
