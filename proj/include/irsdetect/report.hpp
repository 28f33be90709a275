#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsdetect/montecarlo.hpp"

namespace irsdetect {

inline constexpr int kCsvSchemaVersion = 1;

/// Shortest round-trippable decimal form of a double.
std::string format_double(double value);

/// FNV-1a 64-bit content digest, hex encoded.
std::string content_digest(const std::string& bytes);

/// One row of the fixed curve schema. Analytic rows carry trials = 0 and
/// collapse the intervals onto the value.
struct CurveRow {
  std::string axis_name;
  double axis_value = 0.0;
  double threshold = 0.0;
  double pfa = 0.0, pfa_lo = 0.0, pfa_hi = 0.0;
  double pd = 0.0, pd_lo = 0.0, pd_hi = 0.0;
  long trials = 0;
  std::uint64_t seed = 0;
};

std::string curve_csv(const std::vector<CurveRow>& rows);

std::vector<CurveRow> rows_from_curve(const PerformanceCurve& curve,
                                      std::uint64_t seed);

/// Emitted-file record keeping. write_file stores the digest so the
/// manifest can prove byte-identical reruns.
class RunManifest {
 public:
  RunManifest(std::string command, std::string config_path,
              std::string config_echo, std::uint64_t seed, long trials);

  void write_file(const std::string& out_dir, const std::string& name,
                  const std::string& bytes);
  /// Serializes the manifest itself under the fixed name manifest.json;
  /// records out_dir as the run's output directory.
  void finalize(const std::string& out_dir);

 private:
  std::string command_;
  std::string config_path_;
  std::string config_echo_;
  std::uint64_t seed_;
  long trials_;
  std::vector<std::pair<std::string, std::string>> entries_;  // name, digest
};

}  // namespace irsdetect
