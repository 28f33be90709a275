#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irsdetect/channel.hpp"
#include "irsdetect/detectors.hpp"

namespace irsdetect {

/// Scenario description as configured. Channels and powers are drawn
/// once per scenario by default, matching the conditional closed forms;
/// the per-trial flags switch to averaging over fading.
struct ScenarioSpec {
  SystemConfig config;
  DetectorKind detector = DetectorKind::Opt;
  std::optional<double> snr_override_db;  // rescales the noise covariance
  bool resample_channels_per_trial = false;
  bool resample_powers_per_trial = false;
  std::optional<Vector> signal;  // default: all-ones at unit energy
};

/// Scenario with every random scenario-level quantity drawn and the
/// noise covariance resolved and SNR-scaled.
struct ResolvedScenario {
  ScenarioSpec spec;
  ChannelRealization channel;
  RealVector powers_mw;
  SignalSpec signal;
  Matrix noise_cov;
  KnownSideInfo side_info;
  SnrReport snr;  // realized (fixed channel) or expected (averaged mode)
};

ResolvedScenario resolve_scenario(const ScenarioSpec& spec);

struct OperatingPoint {
  double threshold = 0.0;
  double pfa = 0.0, pfa_lo = 0.0, pfa_hi = 0.0;
  double pd = 0.0, pd_lo = 0.0, pd_hi = 0.0;
  long trials = 0;
};

struct CurvePoint {
  double axis_value = 0.0;
  OperatingPoint point;
};

struct PerformanceCurve {
  std::string axis_name;
  std::vector<CurvePoint> points;
};

struct Interval {
  double lo = 0.0, hi = 0.0;
};

/// Wilson score interval for a binomial rate (default 95%).
Interval wilson_interval(long successes, long trials,
                         double z = 1.959963984540054);

/// Independent substream lanes so that calibration draws never overlap
/// estimation draws under the same seed.
enum class PoolLane { Calibration, Estimation, Reference };

/// Detector statistics for `trials` independent draws under one
/// hypothesis, indexed by trial. Per-trial substreams are derived from
/// (seed, lane, trial, hypothesis), so any execution order or degree of
/// parallelism yields bit-identical pools.
std::vector<double> statistic_pool(const ResolvedScenario& scenario,
                                   Hypothesis hypothesis, long trials,
                                   std::uint64_t seed,
                                   PoolLane lane = PoolLane::Estimation);

/// Empirical (1 - target_pfa) quantile of the null statistic.
double calibrate_threshold(const ResolvedScenario& scenario, double target_pfa,
                           long trials, std::uint64_t seed);

OperatingPoint estimate_operating_point(const ResolvedScenario& scenario,
                                        double threshold, long trials,
                                        std::uint64_t seed);

/// One shared pool pass: thresholds are order statistics of the sorted
/// null pool, so pd is non-decreasing in pfa by construction.
PerformanceCurve roc_curve(const ResolvedScenario& scenario,
                           const std::vector<double>& pfa_grid, long trials,
                           std::uint64_t seed);

struct SweepShift {
  double from_value = 0.0;
  double to_value = 0.0;
  std::optional<double> snr_shift_db;  // empty when not measurable
  std::string note;
};

struct SweepOutput {
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<PerformanceCurve> pd_vs_snr;  // one curve per axis value
  std::vector<SweepShift> step_shifts;      // consecutive axis values
  SweepShift endpoint_shift;
};

/// Sweeps one scenario dimension. For M/K/L axes a pd-vs-SNR curve is
/// built per value (threshold recalibrated at target_pfa for every
/// point) and the SNR needed for pd_level is found by inverse linear
/// interpolation; non-monotone curves are reported as not measurable.
SweepOutput sweep(const ScenarioSpec& base, const std::string& axis,
                  const std::vector<double>& values,
                  const std::vector<double>& snr_grid_db, double target_pfa,
                  long trials, std::uint64_t seed, double pd_level = 0.9);

/// Runs fn(0..n-1) across a small thread pool; results must be written
/// to disjoint slots so scheduling cannot affect the outcome.
void parallel_for_index(long n, const std::function<void(long)>& fn);

}  // namespace irsdetect
