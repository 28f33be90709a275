#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irsdetect/analytic.hpp"
#include "irsdetect/detectors.hpp"
#include "irsdetect/rng.hpp"

using namespace irsdetect;

namespace {
Matrix random_complex(Eigen::Index rows, Eigen::Index cols, RngStream& s) {
  Matrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = s.complex_normal();
  }
  return out;
}
}  // namespace

TEST_CASE("opt_perf") {
  CHECK(opt_perf(0.0, Complex(1.0, 0.0)).pfa == doctest::Approx(0.5));
  // Threshold centered on the alternative mean gives pd one half.
  CHECK(opt_perf(2.0 * 1.7, Complex(1.7, 0.0)).pd == doctest::Approx(0.5));
  CHECK(opt_perf(2.0, Complex(2.0, 0.3)).pfa ==
        doctest::Approx(q_function(1.0)).epsilon(1e-12));
  for (double p : {0.01, 0.1, 0.5, 0.9}) {
    const double tau = opt_threshold(p, Complex(3.0, 0.0));
    CHECK(opt_perf(tau, Complex(3.0, 0.0)).pfa == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(opt_perf(0.0, Complex(0.0, 1.0)), DomainError);
}

TEST_CASE("opt_b matches the direct trace") {
  RngStream s(7);
  const Matrix t = random_complex(3, 5, s);
  const Matrix g = random_complex(3, 3, s);
  const Matrix cov = g * g.adjoint() + Matrix::Identity(3, 3);
  const Complex b = opt_b(t, cov);
  const Matrix cov_inv = cov.inverse();
  const Complex direct = (t.adjoint() * cov_inv * t).trace();
  CHECK(std::abs(b - direct) <= 1e-9 * std::abs(direct));
  CHECK(b.real() >= 0.0);
}

TEST_CASE("t1_perf boundaries and monotonicity") {
  const double trace_mm = 8.0, sigma2 = 1.3;
  const int samples = 16, antennas = 4;
  const T1Perf far_right = t1_perf(1e9, trace_mm, sigma2, samples, antennas);
  CHECK(far_right.pfa <= 1e-12);
  CHECK(far_right.pd <= 1e-12);
  const T1Perf far_left = t1_perf(-1e9, trace_mm, sigma2, samples, antennas);
  CHECK(far_left.pfa >= 1.0 - 1e-12);
  CHECK(far_left.pd >= 1.0 - 1e-12);

  double prev_pfa = 1.0, prev_pd = 1.0;
  for (double tau = -2.0; tau <= 2.0; tau += 0.05) {
    const T1Perf perf = t1_perf(tau, trace_mm, sigma2, samples, antennas);
    CHECK(perf.pfa <= prev_pfa + 1e-12);
    CHECK(perf.pd <= prev_pd + 1e-12);
    prev_pfa = perf.pfa;
    prev_pd = perf.pd;
  }

  for (double p : {0.01, 0.2, 0.5}) {
    const double tau = t1_threshold(p, trace_mm, sigma2, samples, antennas);
    CHECK(t1_perf(tau, trace_mm, sigma2, samples, antennas).pfa ==
          doctest::Approx(p).epsilon(1e-8));
  }
}

TEST_CASE("t1 correlation coefficient") {
  CHECK(t1_num_den_correlation(0.0, 1.0, 8, 2).rho == 0.0);
  // rho -> 1 as the signal energy dominates.
  CHECK(t1_num_den_correlation(1e12, 1.0, 8, 2).rho ==
        doctest::Approx(1.0).epsilon(1e-4));
  // Hand value: t=2, sigma2=1, L=8, M=2: E{wv} = 2*(16+2+2) = 40.
  const T1Correlation corr = t1_num_den_correlation(2.0, 1.0, 8, 2);
  CHECK(corr.product_moment == doctest::Approx(40.0).epsilon(1e-12));
  // rho = 2*2 / sqrt(2*16*2 + 4*4) = 4 / sqrt(80).
  CHECK(corr.rho == doctest::Approx(4.0 / std::sqrt(80.0)).epsilon(1e-12));
}

TEST_CASE("t2_perf") {
  const int samples = 16;
  SUBCASE("null tail closed form at M=1") {
    const RealVector eigvals = RealVector::Ones(1);
    const Matrix eigvecs = Matrix::Identity(1, 1);
    const T2Perf perf = t2_perf(double(samples), eigvals, eigvecs,
                                Vector::Zero(1), samples);
    CHECK(perf.pfa == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  }
  SUBCASE("no signal degenerates onto the null") {
    const int antennas = 3;
    const RealVector eigvals = RealVector::Constant(antennas, 2.0);
    const Matrix eigvecs = Matrix::Identity(antennas, antennas);
    const T2Perf perf = t2_perf(10.0, eigvals, eigvecs, Vector::Zero(antennas),
                                samples);
    CHECK(perf.theta1 == doctest::Approx(samples / 2.0).epsilon(1e-12));
    CHECK(perf.beta1 == doctest::Approx(2.0 * antennas).epsilon(1e-12));
    for (double tau : {1.0, 20.0, 60.0}) {
      const T2Perf at_tau = t2_perf(tau, eigvals, eigvecs,
                                    Vector::Zero(antennas), samples);
      CHECK(at_tau.pd == doctest::Approx(at_tau.pfa).epsilon(1e-9));
    }
    // The published beta1 misses the degenerate limit; kept for comparison.
    const T2Perf printed = t2_perf(10.0, eigvals, eigvecs,
                                   Vector::Zero(antennas), samples,
                                   Beta1Form::AsPublished);
    CHECK(printed.beta1 == doctest::Approx(samples * antennas).epsilon(1e-12));
    CHECK(printed.beta1 != doctest::Approx(2.0 * antennas));
  }
  SUBCASE("threshold round trip") {
    for (double p : {0.01, 0.3, 0.8}) {
      const double tau = t2_threshold(p, samples, 4);
      const RealVector eigvals = RealVector::Ones(4);
      const T2Perf perf = t2_perf(tau, eigvals, Matrix::Identity(4, 4),
                                  Vector::Zero(4), samples);
      CHECK(perf.pfa == doctest::Approx(p).epsilon(1e-8));
    }
  }
  SUBCASE("moment identities of the matched gamma") {
    RngStream s(17);
    const int antennas = 2;
    const Matrix g = random_complex(antennas, antennas, s);
    const Matrix cov = g * g.adjoint() + Matrix::Identity(antennas, antennas);
    const Vector u = Vector::Ones(antennas);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    double mode_sum = 0.0;
    for (int i = 0; i < antennas; ++i) {
      mode_sum += std::norm(eig.eigenvectors().col(i).dot(u)) /
                  eig.eigenvalues()(i);
    }
    const T2Perf perf = t2_perf(1.0, eig.eigenvalues(), eig.eigenvectors(), u,
                                samples);
    const double l = samples;
    const double mean = l * antennas + l * l * mode_sum;
    const double var = l * l * antennas + 2.0 * l * l * l * mode_sum;
    CHECK(perf.theta1 * perf.beta1 == doctest::Approx(mean).epsilon(1e-10));
    CHECK(2.0 * perf.theta1 * perf.theta1 * perf.beta1 ==
          doctest::Approx(var).epsilon(1e-10));
  }
}

TEST_CASE("rao exact (Fisher-form) tail") {
  CHECK(rao_pfa_exact(1e-12, 16, 4) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rao_pfa_exact(0.0, 16, 4) == 1.0);
  CHECK(rao_pfa_exact(1e9, 16, 4) <= 1e-12);
  // Hand value: M=1, L=2, tau=2 -> 1 - I(1,2;1/3) = 4/9.
  CHECK(rao_pfa_exact(2.0, 2, 1) == doctest::Approx(4.0 / 9.0).epsilon(1e-10));
  CHECK_THROWS_AS(rao_pfa_exact(1.0, 4, 4), DomainError);

  for (double p : {0.01, 0.2, 0.7}) {
    const double tau = rao_threshold_exact(p, 16, 4);
    CHECK(rao_pfa_exact(tau, 16, 4) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("rao null beta law") {
  // Bounded support [0, 2L].
  CHECK(rao_pfa_null_beta(-1.0, 16, 4) == 1.0);
  CHECK(rao_pfa_null_beta(32.0, 16, 4) == 0.0);
  CHECK(rao_pfa_null_beta(40.0, 16, 4) == 0.0);
  // M=1, L=2: uniform on [0, 4].
  CHECK(rao_pfa_null_beta(2.0, 2, 1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(rao_pfa_null_beta(1.0, 2, 1) == doctest::Approx(0.75).epsilon(1e-10));
  for (double p : {0.01, 0.2, 0.7}) {
    const double tau = rao_threshold_null_beta(p, 16, 4);
    CHECK(rao_pfa_null_beta(tau, 16, 4) == doctest::Approx(p).epsilon(1e-9));
  }
  // Mean of the beta law is 2M; the Fisher form sits higher.
  CHECK(2.0 * 16 * (4.0 / 16.0) == doctest::Approx(8.0));
}

TEST_CASE("rao asymptotic law") {
  // Zero non-centrality collapses pd onto pfa.
  for (double tau : {0.5, 2.0, 8.0, 20.0}) {
    const RaoAsymptoticPerf perf = rao_asymptotic(tau, 0.0, 4);
    CHECK(perf.pd == doctest::Approx(perf.pfa).epsilon(1e-9));
  }
  CHECK(rao_asymptotic(0.0, 3.0, 4).pd == 1.0);
  CHECK(rao_asymptotic(0.0, 3.0, 4).pfa == 1.0);

  SUBCASE("white-noise identity for the non-centrality") {
    RngStream s(23);
    const int m = 3, k = 2, samples = 12;
    const Matrix gain = random_complex(m, k, s);
    Vector signal(k);
    signal << Complex(0.7, -0.1), Complex(0.4, 0.9);
    const double sigma2 = 2.3;
    const Matrix cov = sigma2 * Matrix::Identity(m, m);
    const double lambda = lambda_rao_from_model(gain, signal, cov, samples);
    const double expected =
        2.0 * samples / sigma2 * (gain * signal).squaredNorm();
    CHECK(lambda == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("scale invariance") {
    RngStream s(29);
    const Matrix gain = random_complex(2, 2, s);
    const Vector signal = Vector::Ones(2);
    const Matrix cov = Matrix::Identity(2, 2);
    const double base = lambda_rao_from_model(gain, signal, cov, 8);
    const double c = 5.5;
    const double scaled = lambda_rao_from_model(std::sqrt(c) * gain, signal,
                                                c * cov, 8);
    CHECK(scaled == doctest::Approx(base).epsilon(1e-10));
  }
  SUBCASE("threshold round trip") {
    for (double p : {0.01, 0.4}) {
      const double tau = rao_threshold_asymptotic(p, 4);
      CHECK(rao_asymptotic(tau, 0.0, 4).pfa == doctest::Approx(p).epsilon(1e-9));
    }
  }
}

TEST_CASE("noncentrality") {
  DesignInputs inputs;
  inputs.devices = 2;
  inputs.antennas = 4;
  inputs.irs_elements = 4;
  inputs.samples = 16;
  inputs.sigma2 = 1.0;
  inputs.signal_energy = 1.0;
  inputs.irs_element_gain = 1.0;
  inputs.direct_power = RealVector::Zero(2);
  inputs.lambda_min = 100.0;
  inputs.total_power_mw = 2.0;

  // Direct substitution: lambda = 2*16*4*(16 + 16) = 4096.
  RealVector powers = RealVector::Ones(2);
  const NoncentralityReport rep = noncentrality(inputs, powers);
  CHECK(rep.lambda == doctest::Approx(4096.0).epsilon(1e-12));
  CHECK(rep.snr_eff == doctest::Approx(4096.0 / 128.0).epsilon(1e-12));
  CHECK(rep.detectable);

  // Equal power with K=1 coincides with the general form.
  DesignInputs single = inputs;
  single.devices = 1;
  single.direct_power = RealVector::Zero(1);
  single.total_power_mw = 3.0;
  const NoncentralityReport gen =
      noncentrality(single, RealVector::Constant(1, 3.0));
  const NoncentralityReport eq = noncentrality_equal_power(single);
  CHECK(gen.lambda == doctest::Approx(eq.lambda).epsilon(1e-12));

  // Doubling N with no direct power quadruples lambda.
  DesignInputs doubled = inputs;
  doubled.irs_elements = 8;
  CHECK(noncentrality(doubled, powers).lambda ==
        doctest::Approx(4.0 * rep.lambda).epsilon(1e-12));
}

TEST_CASE("design_guidelines") {
  DesignInputs inputs;
  inputs.devices = 6;
  inputs.antennas = 4;
  inputs.irs_elements = 16;
  inputs.samples = 10;
  inputs.sigma2 = 1.0;
  inputs.signal_energy = 1.0;
  inputs.irs_element_gain = 1.0;
  inputs.direct_power = RealVector::Zero(6);
  inputs.lambda_min = 10.0;
  inputs.snr_min = 1.0;
  inputs.sample_rate_hz = 2.0;
  inputs.channel_gains = RealVector::Constant(6, 3.0);
  inputs.total_power_mw = 5.0;

  const DesignReport rep = design_guidelines(inputs);
  CHECK(rep.min_samples == doctest::Approx(10.0));
  CHECK(rep.max_delay_spread_s == doctest::Approx(0.0));
  CHECK(rep.delay_feasible);
  // Equal gains: no variance term.
  CHECK(rep.power_gap_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.power_gap_order_term == doctest::Approx(4.0 / 256.0).epsilon(1e-12));

  DesignInputs tight = inputs;
  tight.samples = 8;
  const DesignReport infeasible = design_guidelines(tight);
  CHECK_FALSE(infeasible.delay_feasible);

  DesignInputs async = inputs;
  async.delay_spread_s = 1.5;
  CHECK(design_guidelines(async).min_samples_async ==
        doctest::Approx(10.0 + 2.0 * 1.5));
}

TEST_CASE("fim_blocks") {
  SUBCASE("scalar case") {
    const Vector s = Vector::Ones(1);
    const Matrix cov = Matrix::Identity(1, 1);
    const FimBlocks blocks = fim_blocks(s, cov, 3);
    CHECK(blocks.gain_block(0, 0).real() == doctest::Approx(3.0));
    CHECK(blocks.gain_block_conj(0, 0).real() == doctest::Approx(3.0));
    CHECK(blocks.inv_gain_block(0, 0).real() == doctest::Approx(1.0 / 3.0));
    CHECK(blocks.cross_block.rows() == 2);
    CHECK(blocks.cross_block.cols() == 2);
    CHECK(blocks.cross_block.isZero(0.0));
  }
  SUBCASE("scaling the signal scales the information quadratically") {
    RngStream rng(31);
    const Matrix g = random_complex(2, 2, rng);
    const Matrix cov = g * g.adjoint() + Matrix::Identity(2, 2);
    Vector s(2);
    s << Complex(1.0, 0.2), Complex(-0.4, 0.8);
    const FimBlocks base = fim_blocks(s, cov, 5);
    const Complex c(1.5, -2.0);
    const FimBlocks scaled = fim_blocks(c * s, cov, 5);
    CHECK((scaled.gain_block - std::norm(c) * base.gain_block).norm() <=
          1e-10 * base.gain_block.norm());
  }
  SUBCASE("inverse blocks invert on the signal support") {
    Vector s(2);
    s << Complex(2.0, 0.0), Complex(0.0, 1.0);
    const Matrix cov = 2.0 * Matrix::Identity(3, 3);
    const FimBlocks blocks = fim_blocks(s, cov, 4);
    // gain_block * inv_gain_block is the projector onto the s-direction
    // tensored with the identity.
    const Matrix prod = blocks.gain_block * blocks.inv_gain_block;
    const Matrix proj =
        (s.conjugate() * s.transpose()) / s.squaredNorm();
    const Matrix expected = kron(proj, Matrix::Identity(3, 3));
    CHECK((prod - expected).norm() <= 1e-10);
  }
}

TEST_CASE("tail functions are monotone in the threshold") {
  double prev_pfa = 1.0, prev_pd = 1.0;
  for (double tau = 0.0; tau <= 30.0; tau += 0.5) {
    const OptPerf perf = opt_perf(tau, Complex(2.5, 0.0));
    CHECK(perf.pfa <= prev_pfa + 1e-12);
    CHECK(perf.pd <= prev_pd + 1e-12);
    prev_pfa = perf.pfa;
    prev_pd = perf.pd;
  }
  const RealVector eigvals = RealVector::Ones(3);
  const Matrix eigvecs = Matrix::Identity(3, 3);
  const Vector u = 0.7 * Vector::Ones(3);
  prev_pfa = prev_pd = 1.0;
  for (double tau = 0.0; tau <= 400.0; tau += 10.0) {
    const T2Perf perf = t2_perf(tau, eigvals, eigvecs, u, 16);
    CHECK(perf.pfa <= prev_pfa + 1e-12);
    CHECK(perf.pd <= prev_pd + 1e-12);
    prev_pfa = perf.pfa;
    prev_pd = perf.pd;
  }
  prev_pfa = 1.0;
  double prev_beta = 1.0;
  for (double tau = 0.0; tau <= 31.0; tau += 0.5) {
    const double fisher_form = rao_pfa_exact(tau, 16, 4);
    const double beta_form = rao_pfa_null_beta(tau, 16, 4);
    CHECK(fisher_form <= prev_pfa + 1e-12);
    CHECK(beta_form <= prev_beta + 1e-12);
    prev_pfa = fisher_form;
    prev_beta = beta_form;
  }
}

TEST_CASE("pd collapses onto pfa as the signal vanishes") {
  // Informed detector at vanishing b.
  for (double tau : {0.05, 0.3, 1.0}) {
    const OptPerf perf = opt_perf(tau, Complex(1e-9, 0.0));
    CHECK(perf.pd == doctest::Approx(perf.pfa).epsilon(1e-6));
  }
  // Energy-normalized detector at vanishing template energy.
  for (double tau : {-0.5, 0.0, 0.5}) {
    const T1Perf perf = t1_perf(tau, 1e-10, 1.0, 16, 4);
    CHECK(perf.pd == doctest::Approx(perf.pfa).epsilon(1e-4));
  }
}

TEST_CASE("analytic params bundle") {
  RngStream s(37);
  const int antennas = 3, samples = 8;
  const Vector u = Vector::Ones(antennas);
  const Matrix t = u * Eigen::RowVectorXcd::Ones(samples);
  const Matrix cov = 2.0 * Matrix::Identity(antennas, antennas);
  const AnalyticParams p = analytic_params(t, cov, u, samples);
  CHECK(p.noise_is_white);
  CHECK(p.sigma2 == doctest::Approx(2.0));
  CHECK(p.trace_mm == doctest::Approx(double(samples) * antennas));
  CHECK(p.b.real() == doctest::Approx(samples * antennas / 2.0).epsilon(1e-10));
  CHECK(p.lambda_rao ==
        doctest::Approx(2.0 * samples * antennas / 2.0).epsilon(1e-10));
  CHECK(p.mode_energies.sum() == doctest::Approx(double(antennas)).epsilon(1e-10));
  CHECK(p.rho_nd > 0.0);
  CHECK(p.rho_nd < 1.0);
}
