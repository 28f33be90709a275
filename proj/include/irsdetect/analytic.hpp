#pragma once

#include "irsdetect/statfun.hpp"
#include "irsdetect/types.hpp"

namespace irsdetect {

// -------------------------------------------------------------------------
// Optimal (fully informed) detector. Under the null the statistic is
// N(0, 2 Re b) and under the alternative N(2 Re b, 2 Re b), with
// b = tr(template^H Sigma^-1 template).

struct OptPerf {
  double pfa;
  double pd;
};

OptPerf opt_perf(double threshold, Complex b);
double opt_threshold(double pfa_target, Complex b);
Complex opt_b(const Matrix& template_matrix, const Matrix& noise_cov);

// -------------------------------------------------------------------------
// Unknown-noise detector (t1). Both tails are evaluated through the
// Hinkley CDF of a ratio of correlated Gaussians in its positive-
// denominator limiting form. Valid when the denominator mean is many
// standard deviations above zero; the achieved ratios are reported so
// callers can warn when below ~3.

struct T1Perf {
  double pfa;
  double pd;
  double rho;               // numerator/denominator correlation under H1
  double hinkley_ratio_h0;  // denominator mean / std under H0
  double hinkley_ratio_h1;
};

T1Perf t1_perf(double threshold, double trace_mm, double sigma2, int samples,
               int antennas);
double t1_threshold(double pfa_target, double trace_mm, double sigma2,
                    int samples, int antennas);

struct T1Correlation {
  double rho;
  double product_moment;  // E{numerator * denominator} under H1
};

T1Correlation t1_num_den_correlation(double trace_mm, double sigma2,
                                     int samples, int antennas);

// -------------------------------------------------------------------------
// Unknown-power detector (t2). Null law is exactly (L/2) chi^2_2M; the
// alternative is approximated by a gamma matched to the first two
// moments of the weighted non-central chi-square.

/// The published closed form for beta1 is inconsistent with the moment
/// system it solves (its no-signal limit is LM instead of 2M).
/// MomentMatched uses beta1 = 2 (M + L S)^2 / (M + 2 L S) with
/// S = sum_i m_i / lambda_i, which satisfies both matched moments and
/// the degenerate limit; AsPublished reproduces the published expression
/// for comparison.
enum class Beta1Form { MomentMatched, AsPublished };

struct T2Perf {
  double pfa;
  double pd;
  double theta1;
  double beta1;
};

T2Perf t2_perf(double threshold, const RealVector& noise_eigvals,
               const Matrix& noise_eigvecs, const Vector& mean_vector,
               int samples, Beta1Form form = Beta1Form::MomentMatched);
T2Perf t2_perf_from_cov(double threshold, const Matrix& noise_cov,
                        const Vector& mean_vector, int samples,
                        Beta1Form form = Beta1Form::MomentMatched);
double t2_threshold(double pfa_target, int samples, int antennas);

/// Exact alternative tail for white noise: the statistic is exactly
/// (L/2) chi'^2_2M(2 L ||u||^2 / sigma^2). Used as a cross-check of the
/// gamma approximation.
double t2_pd_white_exact(double threshold, double mean_energy, double sigma2,
                         int samples, int antennas);

// -------------------------------------------------------------------------
// Blind detector via the score test.

/// Fisher-form null tail for the blind statistic,
///   pfa = 1 - I(M, L-M+1; (1 + 2L/tau)^-1),
/// equivalently the tail of (2ML/(L-M+1)) F(2M, 2(L-M+1)). Both routes
/// are evaluated and asserted to agree. This form treats the summed
/// column X1 and the Gram matrix X X^H as independent; they are not,
/// so at small L it deviates from the statistic's true law (see
/// rao_pfa_null_beta).
double rao_pfa_exact(double threshold, int samples, int antennas);
double rao_threshold_exact(double pfa_target, int samples, int antennas);

/// Null law accounting for the X1 / X X^H dependence: the statistic is
/// exactly 2L * Beta(M, L-M) under the null, bounded by 2L.
double rao_pfa_null_beta(double threshold, int samples, int antennas);
double rao_threshold_null_beta(double pfa_target, int samples, int antennas);

struct RaoAsymptoticPerf {
  double pfa;
  double pd;
};

/// Wilks large-sample law: central chi^2_2M under the null and
/// non-central chi^2_2M(lambda) under the alternative (Marcum-Q tail).
RaoAsymptoticPerf rao_asymptotic(double threshold, double lambda, int antennas);
double rao_threshold_asymptotic(double pfa_target, int antennas);

/// Non-centrality 2L s^H G^H Sigma^-1 G s, i.e. the published data-
/// dependent form evaluated at E{X X^H | H0} = L Sigma. For white noise
/// this is (2L/sigma^2) ||G s||^2.
double lambda_rao_from_model(const Matrix& gain, const Vector& signal,
                             const Matrix& noise_cov, int samples);

// -------------------------------------------------------------------------
// Scenario-level scalar bundle.

struct AnalyticParams {
  Complex b{};
  double sigma2 = 0.0;  // mean diagonal of the noise covariance
  bool noise_is_white = false;
  double trace_mm = 0.0;
  RealVector noise_eigvals;
  Matrix noise_eigvecs;
  RealVector mode_energies;  // m_i = |q_i^H u|^2
  int samples = 0;
  int antennas = 0;
  double theta1 = 0.0;
  double beta1 = 0.0;
  double lambda_rao = 0.0;
  double rho_nd = 0.0;
};

AnalyticParams analytic_params(const Matrix& template_matrix,
                               const Matrix& noise_cov,
                               const Vector& mean_vector, int samples,
                               Beta1Form form = Beta1Form::MomentMatched);

// -------------------------------------------------------------------------
// Design guidelines.

struct DesignInputs {
  double total_power_mw = 1.0;
  int devices = 1;
  int antennas = 1;
  int irs_elements = 1;
  int samples = 1;
  double sigma2 = 1.0;
  double signal_energy = 1.0;      // ||s||^2
  double irs_element_gain = 1.0;   // per-element cascade gain
  RealVector direct_power;         // E||d_k||^2 per device, >= 0
  double lambda_min = 1.0;
  double snr_min = 1.0;
  double sample_rate_hz = 1.0;
  RealVector channel_gains;        // ||h_k||^2 per device
  double circuit_overhead = 0.0;   // per-sample power cost
  double delay_spread_s = 0.0;     // max_i tau_i - min_i tau_i
};

struct NoncentralityReport {
  double lambda;
  double snr_eff;       // lambda / (2 L M ||s||^2)
  double snr_required;  // lambda_min / (2 L M ||s||^2)
  bool detectable;
};

NoncentralityReport noncentrality(const DesignInputs& inputs,
                                  const RealVector& powers_mw);
NoncentralityReport noncentrality_equal_power(const DesignInputs& inputs);

struct DesignReport {
  double min_samples;            // M + K
  double min_samples_async;      // M + K + fs * delay spread
  double max_delay_spread_s;     // (L - (M+K)) / fs
  bool delay_feasible;
  double min_irs_elements;
  double max_devices;
  double power_gap_ratio;        // 1 + Var(gain)/E(gain)^2
  double power_gap_order_term;   // M / N^2, reported separately
  double pd_gain_per_sample;     // marginal detection gain minus overhead
};

DesignReport design_guidelines(const DesignInputs& inputs);

// -------------------------------------------------------------------------
// Fisher information blocks for the blind score test.

struct FimBlocks {
  Matrix gain_block;        // L (s* s^T) kron Sigma^-1
  Matrix gain_block_conj;   // L (s s^H) kron Sigma^-T
  Matrix inv_gain_block;       // (1/L) (s* s^T)^+ kron Sigma
  Matrix inv_gain_block_conj;  // (1/L) (s s^H)^+ kron Sigma^T
  Matrix cross_block;       // zero, 2MK x 2M^2
};

FimBlocks fim_blocks(const Vector& signal, const Matrix& noise_cov, int samples);

/// Kronecker product, kept local to avoid the unsupported Eigen module.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace irsdetect
