#include "despar/report.hpp"

#include "despar/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace despar {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

namespace {

void write_row(std::ostream& out, const std::string& scenario, Index N, Index T,
               const std::string& label, double value, const std::string& width, int reps,
               int excluded) {
  out << scenario << ',' << N << ',' << T << ',' << label << ',' << format_double(value) << ','
      << width << ',' << reps << ',' << excluded << '\n';
}

Json row_json(const std::string& scenario, Index N, Index T, const std::string& label,
              double value, const Json& width, int reps, int excluded) {
  Json j;
  j["scenario"] = scenario;
  j["N"] = N;
  j["T"] = T;
  j["parameter/mode"] = label;
  j["value"] = value;
  j["width_or_blank"] = width;
  j["replications"] = reps;
  j["excluded"] = excluded;
  return j;
}

}  // namespace

void write_table_csv(std::ostream& out, std::span<const CoverageRow> coverage,
                     std::span<const RejectionRow> rejection) {
  out << kTableHeader << '\n';
  for (const auto& r : coverage)
    write_row(out, r.scenario, r.N, r.T, r.parameter, r.coverage, format_double(r.mean_width),
              r.replications, r.excluded);
  for (const auto& r : rejection)
    write_row(out, r.scenario, r.N, r.T, r.mode, r.rate, "", r.replications, r.excluded);
}

Json table_json(std::span<const CoverageRow> coverage, std::span<const RejectionRow> rejection) {
  Json rows = Json::array();
  for (const auto& r : coverage)
    rows.push_back(row_json(r.scenario, r.N, r.T, r.parameter, r.coverage, r.mean_width,
                            r.replications, r.excluded));
  for (const auto& r : rejection)
    rows.push_back(
        row_json(r.scenario, r.N, r.T, r.mode, r.rate, nullptr, r.replications, r.excluded));
  Json doc;
  doc["rows"] = std::move(rows);
  return doc;
}

void write_decay_csv(std::ostream& out, const std::string& scenario, ErrorMetric metric,
                     std::span<const DecayRow> rows) {
  const char* name = metric == ErrorMetric::L1Estimation ? "l1_estimation" : "prediction";
  out << "scenario,metric,T,median_error,replications,excluded\n";
  for (const auto& r : rows)
    out << scenario << ',' << name << ',' << r.T << ',' << format_double(r.median_error) << ','
        << r.replications << ',' << r.excluded << '\n';
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  j["wall_seconds"] = wall_seconds;
  Json inputs = Json::array();
  for (const auto& [path, digest] : input_digests) inputs.push_back({{"path", path}, {"sha256", digest}});
  j["inputs"] = std::move(inputs);
  return j;
}

}  // namespace despar
