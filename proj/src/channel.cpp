#include "irsdetect/channel.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace irsdetect {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

Matrix sample_fading_matrix(Eigen::Index rows, Eigen::Index cols, double m,
                            RngStream& stream) {
  Matrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      out(r, c) = stream.nakagami_fading(m);
    }
  }
  return out;
}
}  // namespace

void SystemConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + ": must be >= 1");
  };
  positive(antennas, "antennas");
  positive(devices, "devices");
  positive(irs_elements, "irs_elements");
  positive(samples, "samples");
  if (!(nakagami_m >= 0.5)) {
    throw ConfigError("nakagami_m: must be >= 0.5");
  }
  if (!(reflection_amplitude > 0.0 && reflection_amplitude <= 1.0)) {
    throw ConfigError("reflection_amplitude: must be in (0,1]");
  }
  if (!(power_range_mw[0] > 0.0) || !(power_range_mw[0] <= power_range_mw[1])) {
    throw ConfigError("power_range_mw: need 0 < low <= high");
  }
  if (!direct_mask.empty() && int(direct_mask.size()) != devices) {
    throw ConfigError("direct_mask: length must equal devices");
  }
  for (int flag : direct_mask) {
    if (flag != 0 && flag != 1) {
      throw ConfigError("direct_mask: entries must be 0 or 1");
    }
  }
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IidNoise>) {
          if (!(n.sigma2 > 0.0)) throw ConfigError("noise.sigma2: must be > 0");
        } else if constexpr (std::is_same_v<T, DiagonalNoise>) {
          if (n.sigma2.size() != antennas) {
            throw ConfigError("noise.sigma2: length must equal antennas");
          }
          if (!(n.sigma2.minCoeff() > 0.0)) {
            throw ConfigError("noise.sigma2: entries must be > 0");
          }
        } else if constexpr (std::is_same_v<T, CorrelatedNoise>) {
          if (!(n.sigma2 > 0.0)) throw ConfigError("noise.sigma2: must be > 0");
          if (!(n.rho >= 0.0 && n.rho < 1.0)) {
            throw ConfigError("noise.rho: must be in [0,1)");
          }
        } else {
          if (!(n.sigma2 > 0.0)) throw ConfigError("noise.sigma2: must be > 0");
          if (!(n.spread_db >= 0.0)) {
            throw ConfigError("noise.spread_db: must be >= 0");
          }
        }
      },
      noise);
}

std::vector<int> SystemConfig::resolved_direct_mask() const {
  if (!direct_mask.empty()) return direct_mask;
  return std::vector<int>(devices, 1);
}

Matrix build_irs_phase(const RealVector& phases, double amplitude) {
  if (!(amplitude > 0.0 && amplitude <= 1.0)) {
    throw DomainError("build_irs_phase: amplitude must be in (0,1]");
  }
  const Eigen::Index n = phases.size();
  Matrix phi = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phi(i, i) = std::polar(amplitude, phases(i));
  }
  return phi;
}

ChannelRealization sample_channels(const SystemConfig& config, RngStream& stream) {
  config.validate();
  const int m = config.antennas;
  const int k = config.devices;
  const int n = config.irs_elements;

  ChannelRealization real;
  real.device_to_irs = sample_fading_matrix(n, k, config.nakagami_m, stream);
  real.irs_to_ap = sample_fading_matrix(m, n, config.nakagami_m, stream);
  real.direct = sample_fading_matrix(m, k, config.nakagami_m, stream);
  real.irs_phases = RealVector(n);
  for (int i = 0; i < n; ++i) real.irs_phases(i) = stream.uniform(0.0, kTwoPi);
  real.reflection_amplitude = config.reflection_amplitude;
  real.direct_mask = config.resolved_direct_mask();
  real.composite = effective_channel(real);
  return real;
}

Matrix effective_channel(const ChannelRealization& realization) {
  const Eigen::Index m = realization.irs_to_ap.rows();
  const Eigen::Index n = realization.irs_to_ap.cols();
  const Eigen::Index k = realization.device_to_irs.cols();
  if (realization.device_to_irs.rows() != n || realization.direct.rows() != m ||
      realization.direct.cols() != k ||
      Eigen::Index(realization.direct_mask.size()) != k ||
      realization.irs_phases.size() != n) {
    throw ConfigError("effective_channel: inconsistent dimensions");
  }
  const Matrix phi =
      build_irs_phase(realization.irs_phases, realization.reflection_amplitude);
  Matrix h = realization.irs_to_ap * phi * realization.device_to_irs;
  for (Eigen::Index c = 0; c < k; ++c) {
    if (realization.direct_mask[c]) h.col(c) += realization.direct.col(c);
  }
  return h;
}

Matrix noise_covariance(const NoiseModel& model, int antennas) {
  if (antennas < 1) throw ConfigError("noise_covariance: antennas must be >= 1");
  return std::visit(
      [&](const auto& n) -> Matrix {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IidNoise>) {
          return Matrix::Identity(antennas, antennas) * n.sigma2;
        } else if constexpr (std::is_same_v<T, DiagonalNoise>) {
          if (n.sigma2.size() != antennas) {
            throw ConfigError("noise_covariance: diagonal length mismatch");
          }
          Matrix cov = Matrix::Zero(antennas, antennas);
          for (int i = 0; i < antennas; ++i) cov(i, i) = n.sigma2(i);
          return cov;
        } else if constexpr (std::is_same_v<T, CorrelatedNoise>) {
          Matrix cov(antennas, antennas);
          for (int i = 0; i < antennas; ++i) {
            for (int j = 0; j < antennas; ++j) {
              cov(i, j) = n.sigma2 * std::pow(n.rho, std::abs(i - j));
            }
          }
          return cov;
        } else {
          throw ConfigError(
              "noise_covariance: uncalibrated model must be resolved first");
        }
      },
      model);
}

NoiseModel resolve_noise_model(const NoiseModel& model, int antennas,
                               RngStream& stream) {
  if (const auto* unc = std::get_if<UncalibratedNoise>(&model)) {
    RealVector sigma2(antennas);
    for (int i = 0; i < antennas; ++i) {
      const double db = stream.uniform(-unc->spread_db, unc->spread_db);
      sigma2(i) = unc->sigma2 * std::pow(10.0, db / 10.0);
    }
    return DiagonalNoise{std::move(sigma2)};
  }
  return model;
}

RealVector draw_powers(const SystemConfig& config, RngStream& stream) {
  RealVector powers(config.devices);
  for (int i = 0; i < config.devices; ++i) {
    powers(i) = stream.uniform(config.power_range_mw[0], config.power_range_mw[1]);
  }
  return powers;
}

Vector unit_energy_signal(int devices) {
  if (devices < 1) throw DomainError("unit_energy_signal: devices must be >= 1");
  return Vector::Constant(devices, Complex(1.0 / std::sqrt(double(devices)), 0.0));
}

SignalSpec make_signal_spec(const Matrix& composite, const Vector& signal,
                            const RealVector& powers_mw) {
  if (composite.cols() != signal.size() || signal.size() != powers_mw.size()) {
    throw ConfigError("make_signal_spec: dimension mismatch");
  }
  if (!(powers_mw.minCoeff() > 0.0)) {
    throw ConfigError("make_signal_spec: powers must be strictly positive");
  }
  SignalSpec spec;
  spec.signal = signal;
  spec.powers_mw = powers_mw;
  spec.mean_vector =
      composite * powers_mw.cwiseSqrt().cast<Complex>().asDiagonal() * signal;
  return spec;
}

Matrix template_matrix(const SignalSpec& spec, int samples) {
  if (samples < 1) throw ConfigError("template_matrix: samples must be >= 1");
  return spec.mean_vector * Eigen::RowVectorXcd::Ones(samples);
}

ObservationSampler::ObservationSampler(Vector mean_vector, const Matrix& noise_cov,
                                       int samples)
    : mean_(std::move(mean_vector)), cov_(noise_cov), samples_(samples) {
  if (samples_ < 1) throw ConfigError("ObservationSampler: samples must be >= 1");
  if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size()) {
    throw ConfigError("ObservationSampler: covariance dimension mismatch");
  }
  if (cov_.isZero(0.0)) {
    // Noiseless limit: keep a zero factor so draws degenerate cleanly.
    chol_ = Matrix::Zero(cov_.rows(), cov_.cols());
    return;
  }
  Eigen::LLT<Matrix> llt(cov_);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("ObservationSampler: noise covariance not positive definite");
  }
  chol_ = llt.matrixL();
}

Matrix ObservationSampler::draw(Hypothesis hypothesis, RngStream& stream) const {
  const Eigen::Index m = cov_.rows();
  Matrix white(m, samples_);
  for (Eigen::Index c = 0; c < samples_; ++c) {
    for (Eigen::Index r = 0; r < m; ++r) white(r, c) = stream.complex_normal();
  }
  Matrix x = chol_ * white;
  if (hypothesis == Hypothesis::H1) x.colwise() += mean_;
  return x;
}

ObservationBatch generate_observation(const SignalSpec& spec,
                                      const SystemConfig& config,
                                      Hypothesis hypothesis, RngStream& stream) {
  const Matrix cov = noise_covariance(config.noise, config.antennas);
  ObservationSampler sampler(spec.mean_vector, cov, config.samples);
  ObservationBatch batch;
  batch.observations = sampler.draw(hypothesis, stream);
  batch.hypothesis = hypothesis;
  return batch;
}

SnrReport snr(const SignalSpec& spec, const Matrix& noise_cov) {
  const double trace = noise_cov.trace().real();
  if (!(trace > 0.0)) {
    throw ConfigError("snr: noise covariance trace must be positive");
  }
  SnrReport report;
  report.linear = spec.mean_vector.squaredNorm() / trace;
  report.db = 10.0 * std::log10(report.linear);
  return report;
}

WindowVerdict check_observation_window(const WindowSpec& spec,
                                       double observation_start_s, int samples) {
  if (spec.delays_s.empty()) {
    throw DomainError("check_observation_window: delay list must be non-empty");
  }
  if (!(spec.sample_rate_hz > 0.0)) {
    throw DomainError("check_observation_window: sample rate must be positive");
  }
  double min_delay = spec.delays_s.front();
  double max_delay = spec.delays_s.front();
  for (double d : spec.delays_s) {
    min_delay = std::min(min_delay, d);
    max_delay = std::max(max_delay, d);
  }
  WindowVerdict verdict;
  if (!(observation_start_s + samples / spec.sample_rate_hz >= max_delay)) {
    verdict.violated = "window end falls before max delay";
    return verdict;
  }
  if (!(min_delay <= observation_start_s)) {
    verdict.violated = "min delay exceeds observation start";
    return verdict;
  }
  verdict.pass = true;
  return verdict;
}

double expected_mean_energy(const SystemConfig& config, const Vector& signal,
                            const RealVector& powers_mw) {
  const auto mask = config.resolved_direct_mask();
  const double cascade =
      config.irs_elements * config.reflection_amplitude * config.reflection_amplitude;
  double total = 0.0;
  for (int k = 0; k < config.devices; ++k) {
    total += powers_mw(k) * std::norm(signal(k)) * (cascade + (mask[k] ? 1.0 : 0.0));
  }
  return config.antennas * total;
}

}  // namespace irsdetect
