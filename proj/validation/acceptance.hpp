#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace irsdetect::validation {

/// Scale knobs for the acceptance checks. Defaults match the documented
/// scenario sizes; reduced values are used for the nested determinism
/// check and for smoke runs.
struct AcceptanceOptions {
  long trials_pinned = 100000;     // distribution / agreement checks
  long trials_equiv = 10000;       // blind-detector equivalence
  long trials_sweep = 20000;       // per sweep grid point
  long trials_structural = 30000;  // dominance ROC pools
  double sweep_target_pfa = 0.01;
  std::uint64_t seed = 4;
  bool include_determinism = true;  // run the rerun-and-compare check
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> lines;
};

CriterionResult run_criterion(int id, const AcceptanceOptions& options);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// Renders the pass/fail report: one line per criterion followed by its
/// indented detail lines. Byte-deterministic for fixed options.
std::string render_report(const std::vector<CriterionResult>& results);

/// Writes validate_report.txt plus manifest.json into out_dir.
void write_validate_outputs(const std::string& out_dir,
                            const std::vector<CriterionResult>& results,
                            const std::string& config_path,
                            const std::string& config_echo, std::uint64_t seed,
                            long trials);

}  // namespace irsdetect::validation
