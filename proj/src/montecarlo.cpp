#include "irsdetect/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include <Eigen/Cholesky>

namespace irsdetect {

namespace {

// Scenario-level stream ids.
constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kPowerStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
// Trial streams start here; four slots per trial index.
constexpr std::uint64_t kTrialBase = 64;

std::uint64_t trial_stream_id(PoolLane lane, long trial, Hypothesis hyp) {
  const std::uint64_t lane_offset = static_cast<std::uint64_t>(lane) * 2 +
                                    (hyp == Hypothesis::H1 ? 1 : 0);
  return kTrialBase + 8 * std::uint64_t(trial) + lane_offset;
}

Matrix cholesky_factor(const Matrix& cov) {
  if (cov.isZero(0.0)) return Matrix::Zero(cov.rows(), cov.cols());
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("scenario noise covariance is not positive definite");
  }
  return llt.matrixL();
}

/// Per-pool context holding everything a trial needs, prefactored.
struct TrialContext {
  const ResolvedScenario& scenario;
  Matrix noise_chol;

  explicit TrialContext(const ResolvedScenario& rs)
      : scenario(rs), noise_chol(cholesky_factor(rs.noise_cov)) {}

  double statistic(Hypothesis hyp, std::uint64_t seed, PoolLane lane,
                   long trial) const {
    const auto& spec = scenario.spec;
    RngStream stream =
        RngStream::substream(seed, trial_stream_id(lane, trial, hyp));

    const Vector* mean = &scenario.signal.mean_vector;
    const KnownSideInfo* side = &scenario.side_info;

    // Averaged mode: redraw the channel (and optionally powers) from the
    // trial stream, then rebuild the template the informed detectors see.
    Vector trial_mean;
    KnownSideInfo trial_side;
    if (spec.resample_channels_per_trial) {
      const ChannelRealization chan = sample_channels(spec.config, stream);
      RealVector powers = scenario.powers_mw;
      if (spec.resample_powers_per_trial) {
        powers = draw_powers(spec.config, stream);
      }
      const SignalSpec sig =
          make_signal_spec(chan.composite, scenario.signal.signal, powers);
      trial_mean = sig.mean_vector;
      mean = &trial_mean;
      trial_side = scenario.side_info;
      if (trial_side.template_matrix.has_value()) {
        trial_side.template_matrix = template_matrix(sig, spec.config.samples);
      }
      if (trial_side.channel.has_value()) trial_side.channel = chan.composite;
      side = &trial_side;
    }

    const Eigen::Index m = noise_chol.rows();
    const int samples = spec.config.samples;
    Matrix x(m, samples);
    for (int c = 0; c < samples; ++c) {
      for (Eigen::Index r = 0; r < m; ++r) x(r, c) = stream.complex_normal();
    }
    x = noise_chol * x;
    if (hyp == Hypothesis::H1) x.colwise() += *mean;
    return evaluate_detector(spec.detector, x, *side);
  }
};

KnownSideInfo side_info_for(DetectorKind kind, const SignalSpec& sig,
                            const Matrix& noise_cov,
                            const ChannelRealization& chan, int samples) {
  KnownSideInfo side;
  switch (kind) {
    case DetectorKind::Opt:
      side.template_matrix = template_matrix(sig, samples);
      side.noise_cov = noise_cov;
      break;
    case DetectorKind::T1:
    case DetectorKind::T1LowSnr:
    case DetectorKind::T1LargeL:
      side.template_matrix = template_matrix(sig, samples);
      break;
    case DetectorKind::T2:
      side.noise_cov = noise_cov;
      break;
    case DetectorKind::T3Glrt:
    case DetectorKind::T3Rao:
      break;
  }
  side.signal = sig.signal;
  side.channel = chan.composite;
  return side;
}

long count_exceeding(const std::vector<double>& sorted, double threshold) {
  // Number of entries strictly above threshold in an ascending pool.
  auto it = std::upper_bound(sorted.begin(), sorted.end(), threshold);
  return long(sorted.end() - it);
}

OperatingPoint make_point(double threshold, long h0_exceed, long h1_exceed,
                          long trials) {
  OperatingPoint op;
  op.threshold = threshold;
  op.trials = trials;
  op.pfa = double(h0_exceed) / trials;
  op.pd = double(h1_exceed) / trials;
  const Interval fa = wilson_interval(h0_exceed, trials);
  const Interval d = wilson_interval(h1_exceed, trials);
  op.pfa_lo = fa.lo;
  op.pfa_hi = fa.hi;
  op.pd_lo = d.lo;
  op.pd_hi = d.hi;
  return op;
}

}  // namespace

void parallel_for_index(long n, const std::function<void(long)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = unsigned(std::min<long>(hw, std::max<long>(1, n)));
  if (workers == 1 || n < 256) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  const long chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const long lo = w * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

Interval wilson_interval(long successes, long trials, double z) {
  if (trials < 1) throw DomainError("wilson_interval: trials must be >= 1");
  const double n = double(trials);
  const double p = double(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ResolvedScenario resolve_scenario(const ScenarioSpec& spec) {
  spec.config.validate();
  ResolvedScenario rs;
  rs.spec = spec;
  const std::uint64_t seed = spec.config.base_seed;

  RngStream channel_stream = RngStream::substream(seed, kChannelStream);
  rs.channel = sample_channels(spec.config, channel_stream);

  RngStream power_stream = RngStream::substream(seed, kPowerStream);
  rs.powers_mw = draw_powers(spec.config, power_stream);

  const Vector signal = spec.signal.has_value()
                            ? *spec.signal
                            : unit_energy_signal(spec.config.devices);
  if (signal.size() != spec.config.devices) {
    throw ConfigError("scenario signal length must equal devices");
  }
  rs.signal = make_signal_spec(rs.channel.composite, signal, rs.powers_mw);

  RngStream noise_stream = RngStream::substream(seed, kNoiseStream);
  rs.spec.config.noise =
      resolve_noise_model(spec.config.noise, spec.config.antennas, noise_stream);
  rs.noise_cov = noise_covariance(rs.spec.config.noise, spec.config.antennas);

  if (spec.snr_override_db.has_value()) {
    const double snr_lin = std::pow(10.0, *spec.snr_override_db / 10.0);
    double signal_energy = rs.signal.mean_vector.squaredNorm();
    if (spec.resample_channels_per_trial) {
      RealVector powers_for_expectation = rs.powers_mw;
      if (spec.resample_powers_per_trial) {
        powers_for_expectation = RealVector::Constant(
            spec.config.devices,
            0.5 * (spec.config.power_range_mw[0] + spec.config.power_range_mw[1]));
      }
      signal_energy =
          expected_mean_energy(spec.config, signal, powers_for_expectation);
    }
    const double trace = rs.noise_cov.trace().real();
    rs.noise_cov *= signal_energy / (snr_lin * trace);
  }

  if (spec.resample_channels_per_trial) {
    double signal_energy = rs.signal.mean_vector.squaredNorm();
    RealVector powers_for_expectation = rs.powers_mw;
    if (spec.resample_powers_per_trial) {
      powers_for_expectation = RealVector::Constant(
          spec.config.devices,
          0.5 * (spec.config.power_range_mw[0] + spec.config.power_range_mw[1]));
    }
    signal_energy =
        expected_mean_energy(spec.config, signal, powers_for_expectation);
    rs.snr.linear = signal_energy / rs.noise_cov.trace().real();
    rs.snr.db = 10.0 * std::log10(rs.snr.linear);
  } else {
    rs.snr = snr(rs.signal, rs.noise_cov);
  }

  rs.side_info = side_info_for(spec.detector, rs.signal, rs.noise_cov,
                               rs.channel, spec.config.samples);
  return rs;
}

std::vector<double> statistic_pool(const ResolvedScenario& scenario,
                                   Hypothesis hypothesis, long trials,
                                   std::uint64_t seed, PoolLane lane) {
  if (trials < 1) throw ConfigError("statistic_pool: trials must be >= 1");
  TrialContext ctx(scenario);
  const auto count = std::size_t(trials);
  std::vector<double> pool(count);
  parallel_for_index(trials, [&](long t) {
    pool[std::size_t(t)] = ctx.statistic(hypothesis, seed, lane, t);
  });
  return pool;
}

double calibrate_threshold(const ResolvedScenario& scenario, double target_pfa,
                           long trials, std::uint64_t seed) {
  if (!(target_pfa > 0.0 && target_pfa < 1.0)) {
    throw ConfigError("calibrate_threshold: target_pfa must be in (0,1)");
  }
  if (double(trials) < 100.0 / target_pfa) {
    throw ConfigError(
        "calibrate_threshold: insufficient trials for the requested pfa "
        "(need at least 100/target_pfa)");
  }
  std::vector<double> pool = statistic_pool(scenario, Hypothesis::H0, trials,
                                            seed, PoolLane::Calibration);
  std::sort(pool.begin(), pool.end());
  const long n = long(pool.size());
  long idx = long(std::ceil((1.0 - target_pfa) * double(n))) - 1;
  idx = std::clamp<long>(idx, 0, n - 1);
  return pool[std::size_t(idx)];
}

OperatingPoint estimate_operating_point(const ResolvedScenario& scenario,
                                        double threshold, long trials,
                                        std::uint64_t seed) {
  TrialContext ctx(scenario);
  const auto count = std::size_t(trials);
  std::vector<long> h0_flags(count);
  std::vector<long> h1_flags(count);
  parallel_for_index(trials, [&](long t) {
    h0_flags[std::size_t(t)] =
        ctx.statistic(Hypothesis::H0, seed, PoolLane::Estimation, t) > threshold;
    h1_flags[std::size_t(t)] =
        ctx.statistic(Hypothesis::H1, seed, PoolLane::Estimation, t) > threshold;
  });
  long h0_exceed = 0, h1_exceed = 0;
  for (long t = 0; t < trials; ++t) {
    h0_exceed += h0_flags[std::size_t(t)];
    h1_exceed += h1_flags[std::size_t(t)];
  }
  return make_point(threshold, h0_exceed, h1_exceed, trials);
}

PerformanceCurve roc_curve(const ResolvedScenario& scenario,
                           const std::vector<double>& pfa_grid, long trials,
                           std::uint64_t seed) {
  if (pfa_grid.empty()) throw ConfigError("roc_curve: empty pfa grid");
  for (std::size_t i = 0; i < pfa_grid.size(); ++i) {
    if (!(pfa_grid[i] > 0.0 && pfa_grid[i] < 1.0)) {
      throw ConfigError("roc_curve: pfa grid values must be in (0,1)");
    }
    if (i > 0 && !(pfa_grid[i] > pfa_grid[i - 1])) {
      throw ConfigError("roc_curve: pfa grid must be strictly increasing");
    }
  }
  std::vector<double> h0 = statistic_pool(scenario, Hypothesis::H0, trials,
                                          seed, PoolLane::Estimation);
  std::vector<double> h1 = statistic_pool(scenario, Hypothesis::H1, trials,
                                          seed, PoolLane::Estimation);
  std::sort(h0.begin(), h0.end());
  std::sort(h1.begin(), h1.end());

  PerformanceCurve curve;
  curve.axis_name = "pfa";
  const long n = trials;
  for (double pfa : pfa_grid) {
    long idx = long(std::ceil((1.0 - pfa) * double(n))) - 1;
    idx = std::clamp<long>(idx, 0, n - 1);
    const double threshold = h0[std::size_t(idx)];
    const long h0_exceed = count_exceeding(h0, threshold);
    const long h1_exceed = count_exceeding(h1, threshold);
    CurvePoint point;
    point.axis_value = pfa;
    point.point = make_point(threshold, h0_exceed, h1_exceed, n);
    curve.points.push_back(std::move(point));
  }
  return curve;
}

namespace {

ScenarioSpec with_axis_value(const ScenarioSpec& base, const std::string& axis,
                             double value) {
  ScenarioSpec spec = base;
  const int as_int = int(std::lround(value));
  if (axis == "M") {
    spec.config.antennas = as_int;
  } else if (axis == "K") {
    spec.config.devices = as_int;
    if (!spec.config.direct_mask.empty()) spec.config.direct_mask.clear();
    if (spec.signal.has_value()) spec.signal.reset();
  } else if (axis == "L") {
    spec.config.samples = as_int;
  } else if (axis == "snr_db") {
    spec.snr_override_db = value;
  } else {
    throw ConfigError("sweep: unknown axis " + axis);
  }
  return spec;
}

/// First upward crossing of pd_level by linear interpolation; empty when
/// the curve never crosses or is not monotone around the crossing.
std::optional<double> snr_at_level(const PerformanceCurve& curve,
                                   double pd_level, std::string* note) {
  const auto& pts = curve.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double pd0 = pts[i].point.pd;
    const double pd1 = pts[i + 1].point.pd;
    if (pd0 <= pd_level && pd1 >= pd_level) {
      if (pd1 == pd0) return pts[i].axis_value;
      return pts[i].axis_value + (pd_level - pd0) / (pd1 - pd0) *
                                     (pts[i + 1].axis_value - pts[i].axis_value);
    }
  }
  if (note) *note = "pd level not crossed on the SNR grid";
  return std::nullopt;
}

}  // namespace

SweepOutput sweep(const ScenarioSpec& base, const std::string& axis,
                  const std::vector<double>& values,
                  const std::vector<double>& snr_grid_db, double target_pfa,
                  long trials, std::uint64_t seed, double pd_level) {
  if (values.empty()) throw ConfigError("sweep: values must be non-empty");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw ConfigError("sweep: values must be strictly increasing");
    }
  }
  SweepOutput out;
  out.axis_name = axis;
  out.axis_values = values;

  if (axis == "snr_db") {
    PerformanceCurve curve;
    curve.axis_name = "snr_db";
    for (double v : values) {
      const ResolvedScenario rs = resolve_scenario(with_axis_value(base, axis, v));
      const double threshold = calibrate_threshold(rs, target_pfa, trials, seed);
      CurvePoint point;
      point.axis_value = v;
      point.point = estimate_operating_point(rs, threshold, trials, seed);
      curve.points.push_back(std::move(point));
    }
    out.pd_vs_snr.push_back(std::move(curve));
    return out;
  }

  if (snr_grid_db.size() < 2) {
    throw ConfigError("sweep: need an SNR grid with at least two points");
  }
  std::vector<std::optional<double>> crossings;
  std::vector<std::string> notes(values.size());
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    ScenarioSpec spec = with_axis_value(base, axis, values[vi]);
    PerformanceCurve curve;
    curve.axis_name = "snr_db";
    for (double snr_db : snr_grid_db) {
      spec.snr_override_db = snr_db;
      const ResolvedScenario rs = resolve_scenario(spec);
      const double threshold = calibrate_threshold(rs, target_pfa, trials, seed);
      CurvePoint point;
      point.axis_value = snr_db;
      point.point = estimate_operating_point(rs, threshold, trials, seed);
      curve.points.push_back(std::move(point));
    }
    crossings.push_back(snr_at_level(curve, pd_level, &notes[vi]));
    out.pd_vs_snr.push_back(std::move(curve));
  }

  auto make_shift = [&](std::size_t from, std::size_t to) {
    SweepShift shift;
    shift.from_value = values[from];
    shift.to_value = values[to];
    if (crossings[from].has_value() && crossings[to].has_value()) {
      shift.snr_shift_db = *crossings[from] - *crossings[to];
    } else {
      shift.note = "not measurable: " +
                   (crossings[from].has_value() ? notes[to] : notes[from]);
    }
    return shift;
  };
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    out.step_shifts.push_back(make_shift(i, i + 1));
  }
  out.endpoint_shift = make_shift(0, values.size() - 1);
  return out;
}

}  // namespace irsdetect
