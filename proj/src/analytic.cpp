#include "irsdetect/analytic.hpp"

#include <cmath>
#include <iostream>
#include <mutex>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "irsdetect/detectors.hpp"

namespace irsdetect {

namespace {

double require_positive_b(Complex b, const char* what) {
  const double re = b.real();
  if (!(re > 0.0)) {
    throw DomainError(std::string(what) + ": Re(b) must be positive");
  }
  return re;
}

/// Tail of the Hinkley ratio CDF in the positive-denominator limit:
/// P{num/den > t} = Q((theta_d t - theta_n) / (s_n s_d a(t))).
double hinkley_tail(double t, double theta_n, double var_n, double theta_d,
                    double var_d, double rho) {
  const double s_n = std::sqrt(var_n);
  const double s_d = std::sqrt(var_d);
  const double a2 =
      t * t / var_n - 2.0 * rho * t / (s_n * s_d) + 1.0 / var_d;
  if (!(a2 > 0.0)) throw NumericError("hinkley_tail: non-positive a(t)^2");
  return q_function((theta_d * t - theta_n) / (s_n * s_d * std::sqrt(a2)));
}

void check_rao_dims(int samples, int antennas, const char* what) {
  if (antennas < 1) throw DomainError(std::string(what) + ": antennas must be >= 1");
  if (samples <= antennas) {
    throw DomainError(std::string(what) + ": requires samples > antennas");
  }
}

}  // namespace

OptPerf opt_perf(double threshold, Complex b) {
  const double re = require_positive_b(b, "opt_perf");
  const double scale = std::sqrt(2.0 * re);
  return {q_function(threshold / scale),
          q_function((threshold - 2.0 * re) / scale)};
}

double opt_threshold(double pfa_target, Complex b) {
  const double re = require_positive_b(b, "opt_threshold");
  return inv_q(pfa_target) * std::sqrt(2.0 * re);
}

Complex opt_b(const Matrix& template_matrix, const Matrix& noise_cov) {
  Eigen::LLT<Matrix> llt(noise_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("opt_b: noise covariance not positive definite");
  }
  return (template_matrix.adjoint() * llt.solve(template_matrix)).trace();
}

T1Perf t1_perf(double threshold, double trace_mm, double sigma2, int samples,
               int antennas) {
  if (!(trace_mm > 0.0)) throw DomainError("t1_perf: trace_mm must be positive");
  if (!(sigma2 > 0.0)) throw DomainError("t1_perf: sigma2 must be positive");
  if (samples < 1 || antennas < 1) {
    throw DomainError("t1_perf: dimensions must be >= 1");
  }
  const double lm = double(samples) * antennas;
  const double var_num = 2.0 * sigma2 * trace_mm;

  // Null: numerator N(-trace_mm, var_num), denominator N(LM s^2, LM s^4),
  // independent.
  const double den_mean_0 = lm * sigma2;
  const double den_var_0 = lm * sigma2 * sigma2;
  const double pfa =
      hinkley_tail(threshold, -trace_mm, var_num, den_mean_0, den_var_0, 0.0);

  // Alternative: numerator mean flips sign; the denominator gains the
  // signal energy and the pair becomes correlated.
  const double den_mean_1 = lm * sigma2 + trace_mm;
  const double den_var_1 = lm * sigma2 * sigma2 + 2.0 * sigma2 * trace_mm;
  const double rho =
      t1_num_den_correlation(trace_mm, sigma2, samples, antennas).rho;
  const double pd =
      hinkley_tail(threshold, trace_mm, var_num, den_mean_1, den_var_1, rho);

  T1Perf perf;
  perf.pfa = pfa;
  perf.pd = pd;
  perf.rho = rho;
  perf.hinkley_ratio_h0 = den_mean_0 / std::sqrt(den_var_0);
  perf.hinkley_ratio_h1 = den_mean_1 / std::sqrt(den_var_1);
  // The positive-denominator limiting form needs the denominator mean to
  // sit well above zero; warn once per process when it does not.
  if (std::min(perf.hinkley_ratio_h0, perf.hinkley_ratio_h1) < 3.0) {
    static std::once_flag warned;
    std::call_once(warned, [&] {
      std::cerr << "t1_perf: denominator mean/std ratio below 3; the "
                   "ratio-CDF limiting form may be inaccurate\n";
    });
  }
  return perf;
}

double t1_threshold(double pfa_target, double trace_mm, double sigma2,
                    int samples, int antennas) {
  if (!(pfa_target > 0.0 && pfa_target < 1.0)) {
    throw DomainError("t1_threshold: pfa_target must be in (0,1)");
  }
  auto pfa_at = [&](double tau) {
    return -t1_perf(tau, trace_mm, sigma2, samples, antennas).pfa;
  };
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 80 && pfa_at(lo) > -pfa_target; ++it) lo *= 2.0;
  for (int it = 0; it < 80 && pfa_at(hi) < -pfa_target; ++it) hi *= 2.0;
  if (pfa_at(lo) > -pfa_target || pfa_at(hi) < -pfa_target) {
    throw DomainError("t1_threshold: target outside the reachable range");
  }
  return detail::solve_monotone(pfa_at, lo, hi, -pfa_target, Tolerance{});
}

T1Correlation t1_num_den_correlation(double trace_mm, double sigma2,
                                     int samples, int antennas) {
  if (!(trace_mm >= 0.0)) {
    throw DomainError("t1_num_den_correlation: trace_mm must be >= 0");
  }
  if (!(sigma2 > 0.0)) {
    throw DomainError("t1_num_den_correlation: sigma2 must be positive");
  }
  T1Correlation out;
  const double lm = double(samples) * antennas;
  out.product_moment = trace_mm * (lm * sigma2 + trace_mm + 2.0 * sigma2);
  if (trace_mm == 0.0) {
    out.rho = 0.0;  // numerator and denominator independent without signal
    return out;
  }
  out.rho = 2.0 * sigma2 * trace_mm /
            std::sqrt(2.0 * lm * std::pow(sigma2, 3) * trace_mm +
                      4.0 * sigma2 * sigma2 * trace_mm * trace_mm);
  return out;
}

T2Perf t2_perf(double threshold, const RealVector& noise_eigvals,
               const Matrix& noise_eigvecs, const Vector& mean_vector,
               int samples, Beta1Form form) {
  const int antennas = int(noise_eigvals.size());
  if (antennas < 1) throw DomainError("t2_perf: need at least one eigenvalue");
  if (!(noise_eigvals.minCoeff() > 0.0)) {
    throw DomainError("t2_perf: noise eigenvalues must be positive");
  }
  if (noise_eigvecs.rows() != antennas || noise_eigvecs.cols() != antennas ||
      mean_vector.size() != antennas) {
    throw DomainError("t2_perf: dimension mismatch");
  }
  if (!(threshold >= 0.0)) throw DomainError("t2_perf: threshold must be >= 0");
  const double l = samples;

  double mode_sum = 0.0;  // S = sum_i m_i / lambda_i
  for (int i = 0; i < antennas; ++i) {
    const double m_i = std::norm(noise_eigvecs.col(i).dot(mean_vector));
    mode_sum += m_i / noise_eigvals(i);
  }

  T2Perf perf;
  perf.theta1 = l * (antennas + 2.0 * l * mode_sum) /
                (2.0 * (antennas + l * mode_sum));
  switch (form) {
    case Beta1Form::MomentMatched:
      perf.beta1 = 2.0 * std::pow(antennas + l * mode_sum, 2) /
                   (antennas + 2.0 * l * mode_sum);
      break;
    case Beta1Form::AsPublished:
      perf.beta1 = l * antennas + mode_sum;
      break;
  }
  perf.pfa = gamma_upper_reg(antennas, threshold / l);
  perf.pd = gamma_upper_reg(0.5 * perf.beta1, threshold / (2.0 * perf.theta1));
  return perf;
}

T2Perf t2_perf_from_cov(double threshold, const Matrix& noise_cov,
                        const Vector& mean_vector, int samples, Beta1Form form) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(noise_cov);
  if (eig.info() != Eigen::Success) {
    throw NumericError("t2_perf_from_cov: eigendecomposition failed");
  }
  return t2_perf(threshold, eig.eigenvalues(), eig.eigenvectors(), mean_vector,
                 samples, form);
}

double t2_threshold(double pfa_target, int samples, int antennas) {
  if (samples < 1 || antennas < 1) {
    throw DomainError("t2_threshold: dimensions must be >= 1");
  }
  return samples * inv_gamma_upper_reg(antennas, pfa_target);
}

double t2_pd_white_exact(double threshold, double mean_energy, double sigma2,
                         int samples, int antennas) {
  if (!(sigma2 > 0.0)) throw DomainError("t2_pd_white_exact: sigma2 must be > 0");
  const double lambda = 2.0 * samples * mean_energy / sigma2;
  const double scaled = 2.0 * threshold / samples;  // (L/2) chi'^2 quantile
  return 1.0 - noncentral_chi2_cdf(2 * antennas, lambda, scaled);
}

double rao_pfa_exact(double threshold, int samples, int antennas) {
  check_rao_dims(samples, antennas, "rao_pfa_exact");
  if (!(threshold >= 0.0)) {
    throw DomainError("rao_pfa_exact: threshold must be >= 0");
  }
  if (threshold == 0.0) return 1.0;
  const double arg = 1.0 / (1.0 + 2.0 * samples / threshold);
  const double via_beta =
      1.0 - reg_inc_beta(antennas, samples - antennas + 1, arg);
  const double fisher_scale =
      threshold * (samples - antennas + 1) / (2.0 * antennas * samples);
  const double via_fisher =
      1.0 - fisher_cdf(2 * antennas, 2 * (samples - antennas + 1), fisher_scale);
  if (std::abs(via_beta - via_fisher) > 1e-10) {
    throw NumericError("rao_pfa_exact: beta and Fisher routes disagree");
  }
  return via_beta;
}

double rao_threshold_exact(double pfa_target, int samples, int antennas) {
  check_rao_dims(samples, antennas, "rao_threshold_exact");
  if (!(pfa_target > 0.0 && pfa_target < 1.0)) {
    throw DomainError("rao_threshold_exact: pfa_target must be in (0,1)");
  }
  const double x =
      inv_reg_inc_beta(antennas, samples - antennas + 1, 1.0 - pfa_target);
  return 2.0 * samples * x / (1.0 - x);
}

double rao_pfa_null_beta(double threshold, int samples, int antennas) {
  check_rao_dims(samples, antennas, "rao_pfa_null_beta");
  const double bound = 2.0 * samples;
  if (threshold <= 0.0) return 1.0;
  if (threshold >= bound) return 0.0;
  return 1.0 - reg_inc_beta(antennas, samples - antennas, threshold / bound);
}

double rao_threshold_null_beta(double pfa_target, int samples, int antennas) {
  check_rao_dims(samples, antennas, "rao_threshold_null_beta");
  if (!(pfa_target > 0.0 && pfa_target < 1.0)) {
    throw DomainError("rao_threshold_null_beta: pfa_target must be in (0,1)");
  }
  return 2.0 * samples *
         inv_reg_inc_beta(antennas, samples - antennas, 1.0 - pfa_target);
}

RaoAsymptoticPerf rao_asymptotic(double threshold, double lambda, int antennas) {
  if (antennas < 1) throw DomainError("rao_asymptotic: antennas must be >= 1");
  if (!(lambda >= 0.0)) throw DomainError("rao_asymptotic: lambda must be >= 0");
  if (!(threshold >= 0.0)) {
    throw DomainError("rao_asymptotic: threshold must be >= 0");
  }
  RaoAsymptoticPerf perf;
  perf.pfa = threshold == 0.0
                 ? 1.0
                 : gamma_upper_reg(antennas, 0.5 * threshold);
  perf.pd = marcum_q(antennas, std::sqrt(lambda), std::sqrt(threshold));
  return perf;
}

double rao_threshold_asymptotic(double pfa_target, int antennas) {
  if (antennas < 1) {
    throw DomainError("rao_threshold_asymptotic: antennas must be >= 1");
  }
  return 2.0 * inv_gamma_upper_reg(antennas, pfa_target);
}

double lambda_rao_from_model(const Matrix& gain, const Vector& signal,
                             const Matrix& noise_cov, int samples) {
  if (gain.cols() != signal.size() || gain.rows() != noise_cov.rows()) {
    throw DomainError("lambda_rao_from_model: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(noise_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("lambda_rao_from_model: covariance not positive definite");
  }
  const Vector gs = gain * signal;
  return 2.0 * samples * gs.dot(llt.solve(gs)).real();
}

AnalyticParams analytic_params(const Matrix& template_matrix,
                               const Matrix& noise_cov,
                               const Vector& mean_vector, int samples,
                               Beta1Form form) {
  AnalyticParams p;
  p.samples = samples;
  p.antennas = int(noise_cov.rows());
  p.b = opt_b(template_matrix, noise_cov);
  p.trace_mm = template_matrix.squaredNorm();
  p.sigma2 = noise_cov.trace().real() / p.antennas;
  p.noise_is_white =
      (noise_cov - p.sigma2 * Matrix::Identity(p.antennas, p.antennas))
          .isZero(1e-12 * std::abs(p.sigma2));

  Eigen::SelfAdjointEigenSolver<Matrix> eig(noise_cov);
  if (eig.info() != Eigen::Success) {
    throw NumericError("analytic_params: eigendecomposition failed");
  }
  p.noise_eigvals = eig.eigenvalues();
  p.noise_eigvecs = eig.eigenvectors();
  p.mode_energies = RealVector(p.antennas);
  for (int i = 0; i < p.antennas; ++i) {
    p.mode_energies(i) = std::norm(p.noise_eigvecs.col(i).dot(mean_vector));
  }

  const T2Perf t2 = t2_perf(0.0, p.noise_eigvals, p.noise_eigvecs, mean_vector,
                            samples, form);
  p.theta1 = t2.theta1;
  p.beta1 = t2.beta1;

  Eigen::LLT<Matrix> llt(noise_cov);
  p.lambda_rao =
      2.0 * samples * mean_vector.dot(llt.solve(mean_vector)).real();
  p.rho_nd =
      t1_num_den_correlation(p.trace_mm, p.sigma2, samples, p.antennas).rho;
  return p;
}

NoncentralityReport noncentrality(const DesignInputs& inputs,
                                  const RealVector& powers_mw) {
  if (powers_mw.size() != inputs.devices) {
    throw DomainError("noncentrality: powers length must equal devices");
  }
  if (inputs.direct_power.size() != inputs.devices) {
    throw DomainError("noncentrality: direct_power length must equal devices");
  }
  const double n2_gain =
      double(inputs.irs_elements) * inputs.irs_elements * inputs.irs_element_gain;
  double weighted = 0.0;
  for (int k = 0; k < inputs.devices; ++k) {
    weighted += powers_mw(k) * (n2_gain + inputs.direct_power(k));
  }
  const double front = 2.0 * inputs.samples * inputs.antennas *
                       inputs.signal_energy / inputs.sigma2;
  NoncentralityReport report;
  report.lambda = front * weighted;
  const double norm = 2.0 * inputs.samples * inputs.antennas * inputs.signal_energy;
  report.snr_eff = report.lambda / norm;
  report.snr_required = inputs.lambda_min / norm;
  report.detectable = report.snr_eff >= report.snr_required;
  return report;
}

NoncentralityReport noncentrality_equal_power(const DesignInputs& inputs) {
  const RealVector powers = RealVector::Constant(
      inputs.devices, inputs.total_power_mw / inputs.devices);
  return noncentrality(inputs, powers);
}

DesignReport design_guidelines(const DesignInputs& inputs) {
  if (inputs.channel_gains.size() != inputs.devices ||
      inputs.direct_power.size() != inputs.devices) {
    throw DomainError("design_guidelines: per-device vectors must match devices");
  }
  if (!(inputs.sample_rate_hz > 0.0)) {
    throw DomainError("design_guidelines: sample rate must be positive");
  }
  DesignReport report;
  const double dim_floor = inputs.antennas + inputs.devices;
  report.min_samples = dim_floor;
  report.min_samples_async =
      dim_floor + inputs.sample_rate_hz * inputs.delay_spread_s;
  report.max_delay_spread_s =
      (inputs.samples - dim_floor) / inputs.sample_rate_hz;
  report.delay_feasible = report.max_delay_spread_s >= 0.0;

  const double max_gain = inputs.channel_gains.maxCoeff();
  if (!(max_gain > 0.0)) {
    throw DomainError("design_guidelines: channel gains must include a positive entry");
  }
  report.min_irs_elements =
      std::sqrt(inputs.devices * inputs.sigma2 /
                (inputs.total_power_mw * inputs.signal_energy)) /
      std::sqrt(max_gain) * (1.0 + 1.0 / inputs.snr_min);

  const double n2_gain =
      double(inputs.irs_elements) * inputs.irs_elements * inputs.irs_element_gain;
  double gain_weighted = 0.0;
  double gain_total = 0.0;
  for (int k = 0; k < inputs.devices; ++k) {
    gain_weighted +=
        inputs.channel_gains(k) * (n2_gain + inputs.direct_power(k));
    gain_total += inputs.channel_gains(k);
  }
  report.max_devices = 2.0 * inputs.samples * inputs.antennas *
                       inputs.total_power_mw * inputs.signal_energy /
                       (inputs.lambda_min * inputs.sigma2) *
                       (gain_weighted / gain_total);

  const double mean_gain = gain_total / inputs.devices;
  double var_gain = 0.0;
  for (int k = 0; k < inputs.devices; ++k) {
    var_gain += std::pow(inputs.channel_gains(k) - mean_gain, 2);
  }
  var_gain /= inputs.devices;
  report.power_gap_ratio = 1.0 + var_gain / (mean_gain * mean_gain);
  report.power_gap_order_term =
      double(inputs.antennas) /
      (double(inputs.irs_elements) * inputs.irs_elements);

  report.pd_gain_per_sample =
      inputs.total_power_mw * inputs.irs_elements * inputs.irs_elements *
          inputs.signal_energy /
          (2.0 * inputs.sigma2 * inputs.devices * inputs.samples *
           inputs.samples) -
      inputs.circuit_overhead;
  return report;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

FimBlocks fim_blocks(const Vector& signal, const Matrix& noise_cov, int samples) {
  if (signal.size() == 0 || signal.isZero(0.0)) {
    throw DomainError("fim_blocks: signal must be non-zero");
  }
  Eigen::LLT<Matrix> llt(noise_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("fim_blocks: covariance not positive definite");
  }
  const int m = int(noise_cov.rows());
  const int k = int(signal.size());
  const Matrix cov_inv = llt.solve(Matrix::Identity(m, m));
  const Matrix s_conj_outer = signal.conjugate() * signal.transpose();
  const Matrix s_outer = signal * signal.adjoint();

  FimBlocks blocks;
  blocks.gain_block = double(samples) * kron(s_conj_outer, cov_inv);
  blocks.gain_block_conj =
      double(samples) * kron(s_outer, cov_inv.transpose());
  blocks.inv_gain_block =
      kron(pseudo_inverse(s_conj_outer), noise_cov) / double(samples);
  blocks.inv_gain_block_conj =
      kron(pseudo_inverse(s_outer), noise_cov.transpose()) / double(samples);
  blocks.cross_block = Matrix::Zero(2 * m * k, 2 * m * m);
  return blocks;
}

}  // namespace irsdetect
