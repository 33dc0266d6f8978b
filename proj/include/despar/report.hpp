#pragma once

#include "despar/diagnostics.hpp"
#include "despar/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace despar {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.3.0";

/// Header shared by coverage and rejection tables.
inline constexpr const char* kTableHeader =
    "scenario,N,T,parameter/mode,value,width_or_blank,replications,excluded";

void write_table_csv(std::ostream& out, std::span<const CoverageRow> coverage,
                     std::span<const RejectionRow> rejection);
Json table_json(std::span<const CoverageRow> coverage, std::span<const RejectionRow> rejection);

void write_decay_csv(std::ostream& out, const std::string& scenario, ErrorMetric metric,
                     std::span<const DecayRow> rows);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  Json config;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> input_digests;  ///< path, sha256

  Json to_json() const;
};

}  // namespace despar
