#include "irsdetect/detectors.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace irsdetect {

namespace {

Eigen::LLT<Matrix> factor_pd(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError(what);
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    acc += std::log(l(i, i).real());
  }
  return 2.0 * acc;
}

void check_same_shape(const Matrix& x, const Matrix& t, const char* what) {
  if (x.rows() != t.rows() || x.cols() != t.cols()) {
    throw ConfigError(std::string(what) + ": template shape mismatch");
  }
}

void check_blind_preconditions(const Matrix& x, const char* what) {
  if (x.cols() <= x.rows()) {
    throw DomainError(std::string(what) + ": requires more samples than antennas");
  }
}

}  // namespace

const char* detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Opt: return "opt";
    case DetectorKind::T1: return "t1";
    case DetectorKind::T1LowSnr: return "t1_low_snr";
    case DetectorKind::T1LargeL: return "t1_large_l";
    case DetectorKind::T2: return "t2";
    case DetectorKind::T3Glrt: return "t3_glrt";
    case DetectorKind::T3Rao: return "t3_rao";
  }
  throw DomainError("detector_name: unknown kind");
}

DetectorKind detector_from_name(const std::string& name) {
  if (name == "opt") return DetectorKind::Opt;
  if (name == "t1") return DetectorKind::T1;
  if (name == "t1_low_snr") return DetectorKind::T1LowSnr;
  if (name == "t1_large_l") return DetectorKind::T1LargeL;
  if (name == "t2") return DetectorKind::T2;
  if (name == "t3_glrt") return DetectorKind::T3Glrt;
  if (name == "t3_rao") return DetectorKind::T3Rao;
  throw ConfigError("unknown detector: " + name);
}

double t_opt(const Matrix& x, const Matrix& template_matrix,
             const Matrix& noise_cov) {
  check_same_shape(x, template_matrix, "t_opt");
  auto llt = factor_pd(noise_cov, "t_opt: noise covariance not positive definite");
  const Matrix whitened = llt.solve(template_matrix);
  // tr(T^H Sigma^-1 X) as an elementwise sum.
  const Complex trace = (whitened.conjugate().cwiseProduct(x)).sum();
  return 2.0 * trace.real();
}

double t1(const Matrix& x, const Matrix& template_matrix) {
  check_same_shape(x, template_matrix, "t1");
  const double energy = x.squaredNorm();
  if (!(energy > 0.0)) {
    throw UndefinedStatisticError("t1: zero observation energy");
  }
  const double cross =
      2.0 * (template_matrix.conjugate().cwiseProduct(x)).sum().real();
  return (cross - template_matrix.squaredNorm()) / energy;
}

double t1_low_snr(const Matrix& x, const Matrix& template_matrix) {
  check_same_shape(x, template_matrix, "t1_low_snr");
  const double energy = x.squaredNorm();
  if (!(energy > 0.0)) {
    throw UndefinedStatisticError("t1_low_snr: zero observation energy");
  }
  return (template_matrix.conjugate().cwiseProduct(x)).sum().real() / energy;
}

double t1_large_l(const Matrix& x, const Matrix& template_matrix, int samples) {
  check_same_shape(x, template_matrix, "t1_large_l");
  if (samples < 1) throw DomainError("t1_large_l: samples must be >= 1");
  return (template_matrix.conjugate().cwiseProduct(x)).sum().real() / samples;
}

double t2(const Matrix& x, const Matrix& noise_cov) {
  if (noise_cov.rows() != x.rows()) {
    throw ConfigError("t2: noise covariance dimension mismatch");
  }
  auto llt = factor_pd(noise_cov, "t2: noise covariance not positive definite");
  const Vector summed = x.rowwise().sum();
  // Hermitian quadratic form; take the real part to drop round-off.
  return summed.dot(llt.solve(summed)).real();
}

double t3_glrt_log(const Matrix& x) {
  check_blind_preconditions(x, "t3_glrt_log");
  const double samples = double(x.cols());
  const Matrix gram = x * x.adjoint();
  Eigen::LLT<Matrix> llt_outer(gram);
  if (llt_outer.info() != Eigen::Success) {
    throw RankError("t3_glrt_log: X X^H is rank deficient");
  }
  const Vector summed = x.rowwise().sum();
  const Matrix inner = gram - (summed * summed.adjoint()) / samples;
  Eigen::LLT<Matrix> llt_inner(inner);
  if (llt_inner.info() != Eigen::Success) {
    // Perfectly coherent observations: legitimate strongest evidence.
    return std::numeric_limits<double>::infinity();
  }
  const double log_det_outer = log_det_from_llt(llt_outer);
  double stat = -samples * (log_det_from_llt(llt_inner) - log_det_outer);
  if (stat < 0.0 &&
      stat > -1e-9 * samples * std::max(1.0, std::abs(log_det_outer))) {
    stat = 0.0;  // round-off below the identity stat >= 0
  }
  return stat;
}

double t3_rao(const Matrix& x) {
  check_blind_preconditions(x, "t3_rao");
  const Matrix gram = x * x.adjoint();
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw RankError("t3_rao: X X^H is rank deficient");
  }
  const Vector summed = x.rowwise().sum();
  return 2.0 * summed.dot(llt.solve(summed)).real();
}

Matrix pseudo_inverse(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  const double cutoff = double(std::max(a.rows(), a.cols())) * sv(0) *
                        std::numeric_limits<double>::epsilon() * 16.0;
  RealVector inv_sv = RealVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv_sv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv_sv.cast<Complex>().asDiagonal() *
         svd.matrixU().adjoint();
}

Matrix mle_gain(const Matrix& x, const Vector& signal) {
  if (signal.size() == 0 || signal.isZero(0.0)) {
    throw DomainError("mle_gain: signal must be non-zero");
  }
  const double samples = double(x.cols());
  const Vector summed = x.rowwise().sum();
  const Matrix outer_pinv = pseudo_inverse(signal * signal.adjoint());
  return (summed * signal.adjoint() * outer_pinv) / samples;
}

PowerMleResult mle_power(const Matrix& x, const Matrix& channel,
                         const Vector& signal) {
  if (signal.size() == 0 || signal.isZero(0.0)) {
    throw DomainError("mle_power: signal must be non-zero");
  }
  if (channel.rows() != x.rows()) {
    throw ConfigError("mle_power: channel dimension mismatch");
  }
  Eigen::JacobiSVD<Matrix> svd(channel);
  const auto& sv = svd.singularValues();
  const double cutoff = double(std::max(channel.rows(), channel.cols())) * sv(0) *
                        std::numeric_limits<double>::epsilon() * 16.0;
  const bool full_column_rank =
      sv.size() == channel.cols() && sv(sv.size() - 1) > cutoff;

  PowerMleResult result;
  result.used_pseudoinverse = !full_column_rank;
  Matrix left_inverse;
  if (full_column_rank) {
    left_inverse =
        (channel.adjoint() * channel).ldlt().solve(channel.adjoint());
  } else {
    left_inverse = pseudo_inverse(channel);
  }
  const double samples = double(x.cols());
  const Vector summed = x.rowwise().sum();
  const Matrix outer_pinv = pseudo_inverse(signal * signal.adjoint());
  result.sqrt_power =
      (left_inverse * summed * signal.adjoint() * outer_pinv) / samples;
  return result;
}

Matrix mle_noise_cov(const Matrix& x) {
  return (x * x.adjoint()) / double(x.cols());
}

Matrix mle_noise_cov(const Matrix& x, const Matrix& template_matrix) {
  check_same_shape(x, template_matrix, "mle_noise_cov");
  const Matrix residual = x - template_matrix;
  return (residual * residual.adjoint()) / double(x.cols());
}

double mle_noise_var(const Matrix& x) {
  return x.squaredNorm() / double(x.rows() * x.cols());
}

double mle_noise_var(const Matrix& x, const Matrix& template_matrix) {
  check_same_shape(x, template_matrix, "mle_noise_var");
  return (x - template_matrix).squaredNorm() / double(x.rows() * x.cols());
}

double evaluate_detector(DetectorKind kind, const Matrix& x,
                         const KnownSideInfo& side) {
  auto require = [&](const auto& opt, const char* what) -> const auto& {
    if (!opt.has_value()) {
      throw ConfigError(std::string(detector_name(kind)) + " requires " + what);
    }
    return *opt;
  };
  switch (kind) {
    case DetectorKind::Opt:
      return t_opt(x, require(side.template_matrix, "the signal template"),
                   require(side.noise_cov, "the noise covariance"));
    case DetectorKind::T1:
      return t1(x, require(side.template_matrix, "the signal template"));
    case DetectorKind::T1LowSnr:
      return t1_low_snr(x, require(side.template_matrix, "the signal template"));
    case DetectorKind::T1LargeL:
      return t1_large_l(x, require(side.template_matrix, "the signal template"),
                        int(x.cols()));
    case DetectorKind::T2:
      return t2(x, require(side.noise_cov, "the noise covariance"));
    case DetectorKind::T3Glrt:
      return t3_glrt_log(x);
    case DetectorKind::T3Rao:
      return t3_rao(x);
  }
  throw DomainError("evaluate_detector: unknown kind");
}

}  // namespace irsdetect
