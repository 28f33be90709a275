#include "irsdetect/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace irsdetect {

std::string format_double(double value) {
  char buffer[40];
  // %.17g is always round-trippable; prefer the shorter %.15g when exact.
  std::snprintf(buffer, sizeof(buffer), "%.15g", value);
  if (std::strtod(buffer, nullptr) == value) return buffer;
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string content_digest(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "schema_version,axis_name,axis_value,threshold,pfa,pfa_lo,pfa_hi,"
         "pd,pd_lo,pd_hi,trials,seed\n";
  for (const auto& row : rows) {
    out << kCsvSchemaVersion << ',' << row.axis_name << ','
        << format_double(row.axis_value) << ',' << format_double(row.threshold)
        << ',' << format_double(row.pfa) << ',' << format_double(row.pfa_lo)
        << ',' << format_double(row.pfa_hi) << ',' << format_double(row.pd)
        << ',' << format_double(row.pd_lo) << ',' << format_double(row.pd_hi)
        << ',' << row.trials << ',' << row.seed << '\n';
  }
  return out.str();
}

std::vector<CurveRow> rows_from_curve(const PerformanceCurve& curve,
                                      std::uint64_t seed) {
  std::vector<CurveRow> rows;
  for (const auto& point : curve.points) {
    CurveRow row;
    row.axis_name = curve.axis_name;
    row.axis_value = point.axis_value;
    row.threshold = point.point.threshold;
    row.pfa = point.point.pfa;
    row.pfa_lo = point.point.pfa_lo;
    row.pfa_hi = point.point.pfa_hi;
    row.pd = point.point.pd;
    row.pd_lo = point.point.pd_lo;
    row.pd_hi = point.point.pd_hi;
    row.trials = point.point.trials;
    row.seed = seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

RunManifest::RunManifest(std::string command, std::string config_path,
                         std::string config_echo, std::uint64_t seed,
                         long trials)
    : command_(std::move(command)),
      config_path_(std::move(config_path)),
      config_echo_(std::move(config_echo)),
      seed_(seed),
      trials_(trials) {}

void RunManifest::write_file(const std::string& out_dir, const std::string& name,
                             const std::string& bytes) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
  out << bytes;
  out.close();
  entries_.emplace_back(name, content_digest(bytes));
}

void RunManifest::finalize(const std::string& out_dir) {
  nlohmann::json doc;
  doc["command"] = command_;
  doc["config_path"] = config_path_;
  doc["out_dir"] = out_dir;
  doc["seed"] = seed_;
  doc["trials"] = trials_;
  doc["config"] = nlohmann::json::parse(config_echo_);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, digest] : entries_) {
    files.push_back({{"file", name}, {"digest", digest}});
  }
  doc["files"] = files;
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest.json in " + out_dir);
  out << doc.dump(2) << '\n';
}

}  // namespace irsdetect
