#pragma once

#include <optional>

#include "irsdetect/types.hpp"

namespace irsdetect {

enum class DetectorKind { Opt, T1, T1LowSnr, T1LargeL, T2, T3Glrt, T3Rao };

const char* detector_name(DetectorKind kind);
DetectorKind detector_from_name(const std::string& name);

/// Side information available to a detector. Which entries must be
/// present depends on the kind: Opt needs the template and the noise
/// covariance, the T1 family needs the template, T2 needs the noise
/// covariance, the blind pair needs nothing.
struct KnownSideInfo {
  std::optional<Matrix> template_matrix;  // M x L receive-side mean
  std::optional<Matrix> noise_cov;        // M x M Hermitian PD
  std::optional<Vector> signal;           // K
  std::optional<Matrix> channel;          // M x K
};

/// Matched-filter statistic with full knowledge:
/// 2 Re tr(template^H Sigma^-1 X).
double t_opt(const Matrix& x, const Matrix& template_matrix,
             const Matrix& noise_cov);

/// Noise-variance-free energy-normalized statistic:
/// [tr(2 Re(template^H X)) - tr(template^H template)] / tr(X^H X).
double t1(const Matrix& x, const Matrix& template_matrix);

/// Low-SNR limit of t1: Re tr(template^H X) / tr(X^H X).
double t1_low_snr(const Matrix& x, const Matrix& template_matrix);

/// Large-sample limit of t1: Re tr(template^H X) / L.
double t1_large_l(const Matrix& x, const Matrix& template_matrix, int samples);

/// Power-blind statistic with known noise: 1^T X^H Sigma^-1 X 1.
double t2(const Matrix& x, const Matrix& noise_cov);

/// Blind GLRT in the log domain:
/// -L [ logdet(X X^H - (1/L) X 1 1^T X^H) - logdet(X X^H) ].
/// Always >= 0; returns +infinity for perfectly coherent data where the
/// inner matrix is singular (the strongest-evidence outcome).
double t3_glrt_log(const Matrix& x);

/// Blind score-test statistic: 2 * 1^T X^H (X X^H)^-1 X 1, in [0, 2L].
double t3_rao(const Matrix& x);

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// max(rows,cols) * max_sv * eps * 16 are treated as zero.
Matrix pseudo_inverse(const Matrix& a);

/// MLE of the combined gain matrix G = H P^(1/2) under H1:
/// (1/L) X 1 s^H (s s^H)^+.
Matrix mle_gain(const Matrix& x, const Vector& signal);

struct PowerMleResult {
  Matrix sqrt_power;          // K x K, not projected onto the diagonal cone
  bool used_pseudoinverse;    // channel was rank deficient
};

/// MLE of P^(1/2) given the channel: (1/L) H_left^-1 X 1 s^H (s s^H)^+,
/// falling back to the Moore-Penrose inverse of H when rank deficient.
PowerMleResult mle_power(const Matrix& x, const Matrix& channel,
                         const Vector& signal);

/// Sample covariance (1/L) R R^H with R = X (null) or X - template.
Matrix mle_noise_cov(const Matrix& x);
Matrix mle_noise_cov(const Matrix& x, const Matrix& template_matrix);

/// White-noise variance estimate (1/(M L)) tr(R R^H).
double mle_noise_var(const Matrix& x);
double mle_noise_var(const Matrix& x, const Matrix& template_matrix);

/// Dispatches to the statistic for `kind`, checking that the required
/// side information is present.
double evaluate_detector(DetectorKind kind, const Matrix& x,
                         const KnownSideInfo& side);

}  // namespace irsdetect
