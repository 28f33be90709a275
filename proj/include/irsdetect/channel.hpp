#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "irsdetect/rng.hpp"
#include "irsdetect/types.hpp"

namespace irsdetect {

// -------------------------------------------------------------------------
// Noise models. Each resolves to a Hermitian positive-definite covariance.

/// Spatially white noise, common variance per antenna.
struct IidNoise {
  double sigma2 = 1.0;
};

/// Independent per-antenna variances.
struct DiagonalNoise {
  RealVector sigma2;
};

/// Exponential spatial correlation profile sigma2 * rho^|i-j|.
struct CorrelatedNoise {
  double sigma2 = 1.0;
  double rho = 0.0;
};

/// Uncalibrated receive chains: per-antenna variances drawn log-uniform
/// within +-spread_db of the nominal value, fixed once per scenario.
/// Must be resolved to DiagonalNoise (with a stream) before use.
struct UncalibratedNoise {
  double sigma2 = 1.0;
  double spread_db = 3.0;
};

using NoiseModel =
    std::variant<IidNoise, DiagonalNoise, CorrelatedNoise, UncalibratedNoise>;

/// Scenario dimensions and statistical assumptions.
struct SystemConfig {
  int antennas = 4;       // receive array size at the AP
  int devices = 6;        // IoT transmitters
  int irs_elements = 16;  // passive reflector count
  int samples = 16;       // observation snapshots

  double nakagami_m = 2.0;
  double reflection_amplitude = 0.8;
  std::array<double, 2> power_range_mw{10.0, 50.0};
  NoiseModel noise = IidNoise{};
  std::vector<int> direct_mask;  // per-device direct-path flags; empty = all on
  std::uint64_t base_seed = 1;

  void validate() const;  // throws ConfigError naming the violated field
  std::vector<int> resolved_direct_mask() const;
};

/// One draw of all propagation matrices plus the assembled composite.
struct ChannelRealization {
  Matrix device_to_irs;   // N x K
  Matrix irs_to_ap;       // M x N
  Matrix direct;          // M x K, before masking
  RealVector irs_phases;  // N, in [0, 2pi)
  double reflection_amplitude = 1.0;
  std::vector<int> direct_mask;  // K
  Matrix composite;              // M x K effective channel
};

/// Known transmit side: per-device signal values and powers, plus the
/// derived receive-side mean vector for a given channel.
struct SignalSpec {
  Vector signal;         // K
  RealVector powers_mw;  // K, diagonal of the power matrix
  Vector mean_vector;    // M: composite * P^(1/2) * signal
};

struct ObservationBatch {
  Matrix observations;  // M x L
  Hypothesis hypothesis = Hypothesis::H0;
  long trial_index = 0;
};

/// Timing feasibility inputs: device delays and sampling rate.
struct WindowSpec {
  std::vector<double> delays_s;
  double start_bound_s = 0.0;
  double sample_rate_hz = 1.0;
};

struct WindowVerdict {
  bool pass = false;
  std::string violated;  // names the failed inequality, empty on pass
};

struct SnrReport {
  double linear = 0.0;
  double db = 0.0;
};

// -------------------------------------------------------------------------
// Operations

/// Diagonal reflection matrix with entries amplitude * exp(j*phase).
Matrix build_irs_phase(const RealVector& phases, double amplitude);

/// Draws every propagation entry as Nakagami-m fading with unit second
/// moment and uniform phase; IRS phases uniform on [0, 2pi).
ChannelRealization sample_channels(const SystemConfig& config, RngStream& stream);

/// Recomputes the composite channel from the stored pieces:
/// irs_to_ap * Phi * device_to_irs + direct .* mask.
Matrix effective_channel(const ChannelRealization& realization);

/// Covariance for a concrete noise model. UncalibratedNoise must be
/// resolved first and is rejected here.
Matrix noise_covariance(const NoiseModel& model, int antennas);

/// Replaces UncalibratedNoise by a concrete per-antenna draw; other
/// models pass through unchanged.
NoiseModel resolve_noise_model(const NoiseModel& model, int antennas,
                               RngStream& stream);

/// Per-device powers drawn once per scenario, uniform over the range.
RealVector draw_powers(const SystemConfig& config, RngStream& stream);

/// All-ones signal scaled to unit energy.
Vector unit_energy_signal(int devices);

SignalSpec make_signal_spec(const Matrix& composite, const Vector& signal,
                            const RealVector& powers_mw);

/// The rank-one M x L receive-side template: mean_vector repeated.
Matrix template_matrix(const SignalSpec& spec, int samples);

/// Draws observations with a prefactored noise covariance; used by the
/// trial engine where the factorization must not be repeated per trial.
class ObservationSampler {
 public:
  ObservationSampler(Vector mean_vector, const Matrix& noise_cov, int samples);

  Matrix draw(Hypothesis hypothesis, RngStream& stream) const;
  const Matrix& noise_cov() const { return cov_; }

 private:
  Vector mean_;
  Matrix cov_;
  Matrix chol_;  // lower factor; zero matrix for the noiseless limit
  int samples_;
};

ObservationBatch generate_observation(const SignalSpec& spec,
                                      const SystemConfig& config,
                                      Hypothesis hypothesis, RngStream& stream);

/// Average SNR: ||mean_vector||^2 / tr(noise covariance).
SnrReport snr(const SignalSpec& spec, const Matrix& noise_cov);

/// Checks that the observation window covers all device delays.
WindowVerdict check_observation_window(const WindowSpec& spec,
                                       double observation_start_s, int samples);

/// Expected composite-channel energy per device entry:
/// E||h_k||^2 = M (N a^2 + delta_k). Used for SNR targeting when the
/// channel is redrawn per trial.
double expected_mean_energy(const SystemConfig& config, const Vector& signal,
                            const RealVector& powers_mw);

}  // namespace irsdetect
