#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irsdetect/detectors.hpp"
#include "irsdetect/rng.hpp"
#include "stats_tests.hpp"

using namespace irsdetect;

namespace {

Matrix random_complex(Eigen::Index rows, Eigen::Index cols, RngStream& s) {
  Matrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = s.complex_normal();
  }
  return out;
}

Matrix random_unitary(Eigen::Index n, RngStream& s) {
  const Matrix g = random_complex(n, n, s);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

Matrix scalar1x1(Complex v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("t_opt hand values") {
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(t_opt(eye, eye, eye) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(t_opt(Matrix::Zero(2, 2), eye, eye) == doctest::Approx(0.0));
  // Purely imaginary trace contributes nothing.
  const Matrix ximag = Complex(0.0, 1.0) * eye;
  CHECK(t_opt(ximag, eye, eye) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(t_opt(eye, eye, Matrix::Zero(2, 2)), NumericError);
}

TEST_CASE("t1 family hand values") {
  CHECK(t1(scalar1x1(1.0), scalar1x1(1.0)) == doctest::Approx(1.0));
  CHECK(t1(scalar1x1(2.0), scalar1x1(1.0)) == doctest::Approx(0.75));
  Matrix x12(1, 2), m12(1, 2);
  x12 << Complex(1, 0), Complex(1, 0);
  m12 << Complex(1, 0), Complex(1, 0);
  CHECK(t1(x12, m12) == doctest::Approx(1.0));
  CHECK_THROWS_AS(t1(Matrix::Zero(1, 2), m12), UndefinedStatisticError);

  CHECK(t1_low_snr(scalar1x1(1.0), scalar1x1(1.0)) == doctest::Approx(1.0));
  CHECK(t1_low_snr(scalar1x1(2.0), scalar1x1(1.0)) == doctest::Approx(0.5));
  CHECK(t1_low_snr(x12, Matrix::Zero(1, 2)) == doctest::Approx(0.0));

  CHECK(t1_large_l(x12, m12, 2) == doctest::Approx(1.0));
  CHECK(t1_large_l(Matrix::Zero(1, 2), m12, 2) == doctest::Approx(0.0));
  Matrix xj(1, 2);
  xj << Complex(0, 1), Complex(0, 1);
  CHECK(t1_large_l(xj, m12, 2) == doctest::Approx(0.0));
}

TEST_CASE("t2 hand values") {
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(t2(eye, eye) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(t2(Matrix::Zero(2, 2), eye) == doctest::Approx(0.0));
  Matrix cancel(1, 2);
  cancel << Complex(1, 0), Complex(-1, 0);
  CHECK(t2(cancel, Matrix::Identity(1, 1)) == doctest::Approx(0.0));
}

TEST_CASE("t2 non-negative for Hermitian PD covariance") {
  RngStream s(11);
  for (int it = 0; it < 200; ++it) {
    const Matrix x = random_complex(3, 6, s);
    const Matrix g = random_complex(3, 3, s);
    const Matrix cov = g * g.adjoint() + 0.1 * Matrix::Identity(3, 3);
    CHECK(t2(x, cov) >= -1e-10);
  }
}

TEST_CASE("t3 blind statistics hand values") {
  Matrix cancel(1, 2);
  cancel << Complex(1, 0), Complex(-1, 0);
  CHECK(t3_glrt_log(cancel) == doctest::Approx(0.0));
  CHECK(t3_rao(cancel) == doctest::Approx(0.0));

  Matrix mixed(1, 2);
  mixed << Complex(1, 0), Complex(0, 1);
  CHECK(t3_glrt_log(mixed) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  Matrix coherent(1, 2);
  coherent << Complex(1, 0), Complex(1, 0);
  CHECK(std::isinf(t3_glrt_log(coherent)));
  CHECK(t3_rao(coherent) == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(t3_rao(Matrix::Ones(2, 2)), DomainError);
  CHECK_THROWS_AS(t3_glrt_log(Matrix::Ones(3, 2)), DomainError);
}

TEST_CASE("t3_rao bound and t3_glrt_log sign on random inputs") {
  RngStream s(21);
  for (int it = 0; it < 2000; ++it) {
    const int m = 1 + int(s.uniform() * 3.0);       // 1..3
    const int l = m + 1 + int(s.uniform() * 8.0);   // m+1..m+8
    const Matrix x = random_complex(m, l, s);
    const double rao = t3_rao(x);
    CHECK(rao >= 0.0);
    CHECK(rao <= 2.0 * l + 1e-9);
    const double glrt = t3_glrt_log(x);
    CHECK(glrt >= 0.0);
    // Exact algebraic link through q = rao/2:
    // glrt = -L log(1 - q/L).
    const double expected = -double(l) * std::log1p(-rao / (2.0 * l));
    CHECK(glrt == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("zero column sum gives exactly zero glrt") {
  RngStream s(31);
  const Matrix half = random_complex(2, 3, s);
  // Interleave +-columns so the left-to-right row sums cancel exactly.
  Matrix x(2, 6);
  for (int c = 0; c < 3; ++c) {
    x.col(2 * c) = half.col(c);
    x.col(2 * c + 1) = -half.col(c);
  }
  CHECK(x.rowwise().sum().isZero(0.0));
  CHECK(t3_rao(x) == 0.0);
  CHECK(t3_glrt_log(x) == 0.0);
}

TEST_CASE("blind statistics are invariant under unitary row transforms") {
  RngStream s(41);
  for (int it = 0; it < 50; ++it) {
    const Matrix x = random_complex(3, 9, s);
    const Matrix u = random_unitary(3, s);
    CHECK(t3_rao(u * x) == doctest::Approx(t3_rao(x)).epsilon(1e-9));
    CHECK(t3_glrt_log(u * x) ==
          doctest::Approx(t3_glrt_log(x)).epsilon(1e-8));
  }
}

TEST_CASE("low-SNR rank agreement between blind GLRT and Rao") {
  // Mixed H0/H1 trials at SNR well below -15 dB.
  RngStream s(51);
  const int m = 4, l = 16;
  std::vector<double> glrt, rao;
  const Vector mean = 0.05 * Vector::Ones(m);  // tiny signal
  for (int t = 0; t < 1500; ++t) {
    Matrix x = random_complex(m, l, s);
    if (t % 2) x.colwise() += mean;
    glrt.push_back(t3_glrt_log(x));
    rao.push_back(t3_rao(x));
  }
  CHECK(validation::spearman(glrt, rao) >= 0.95);
}

TEST_CASE("mle_gain") {
  // K=1, s=[2], X=[2,2]: true gain 1.
  Matrix x(1, 2);
  x << Complex(2, 0), Complex(2, 0);
  Vector s1 = Vector::Constant(1, Complex(2.0, 0.0));
  const Matrix g = mle_gain(x, s1);
  CHECK(g.rows() == 1);
  CHECK(g.cols() == 1);
  CHECK(g(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(mle_gain(Matrix::Zero(1, 2), s1).isZero(0.0));
  CHECK_THROWS_AS(mle_gain(x, Vector::Zero(1)), DomainError);

  SUBCASE("noiseless data recovers the projection of G onto s") {
    RngStream rng(61);
    const int m = 3, k = 2, l = 6;
    const Matrix g_true = random_complex(m, k, rng);
    Vector s(k);
    s << Complex(1.0, 0.5), Complex(-0.3, 0.2);
    const Matrix x_clean =
        g_true * s * Eigen::RowVectorXcd::Ones(l);
    const Matrix g_hat = mle_gain(x_clean, s);
    const Matrix expected = g_true * s * s.adjoint() / s.squaredNorm();
    CHECK((g_hat - expected).norm() <= 1e-10);
  }
}

TEST_CASE("mle_power") {
  // K=1, H=[1], s=[1], X = 2 * ones: sqrt power 2.
  Matrix x(1, 3);
  x << Complex(2, 0), Complex(2, 0), Complex(2, 0);
  const Matrix h = Matrix::Ones(1, 1);
  const Vector s = Vector::Ones(1);
  const PowerMleResult res = mle_power(x, h, s);
  CHECK_FALSE(res.used_pseudoinverse);
  CHECK(res.sqrt_power(0, 0).real() == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(mle_power(Matrix::Zero(1, 3), h, s).sqrt_power.isZero(0.0));

  SUBCASE("left inverse reproduces the identity on full-rank channels") {
    RngStream rng(71);
    const Matrix chan = random_complex(4, 2, rng);
    Eigen::JacobiSVD<Matrix> svd(chan);
    REQUIRE(svd.singularValues()(1) > 1e-8);
    const Matrix left =
        (chan.adjoint() * chan).ldlt().solve(chan.adjoint());
    CHECK((left * chan - Matrix::Identity(2, 2)).norm() <= 1e-10);
  }
  SUBCASE("rank-deficient channel flips to the pseudo-inverse") {
    RngStream rng(81);
    Matrix chan(2, 2);
    chan.col(0) = Vector::Ones(2);
    chan.col(1) = Vector::Ones(2);  // rank 1
    const PowerMleResult deficient =
        mle_power(random_complex(2, 4, rng), chan, Vector::Ones(2));
    CHECK(deficient.used_pseudoinverse);
  }
}

TEST_CASE("mle_noise") {
  Matrix x(1, 2);
  x << Complex(1, 0), Complex(1, 0);
  CHECK(mle_noise_var(x) == doctest::Approx(1.0));
  CHECK(mle_noise_var(x, x) == doctest::Approx(0.0));

  RngStream s(91);
  const Matrix data = random_complex(3, 8, s);
  const Matrix cov = mle_noise_cov(data);
  CHECK((cov - cov.adjoint()).norm() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("pseudo_inverse satisfies the Penrose identities") {
  RngStream s(101);
  const Matrix a = random_complex(4, 2, s);
  const Matrix pinv = pseudo_inverse(a);
  CHECK((a * pinv * a - a).norm() <= 1e-10);
  CHECK((pinv * a * pinv - pinv).norm() <= 1e-10);
  // Rank-one special case (s s^H)^+ = s s^H / ||s||^4.
  Vector v(2);
  v << Complex(1, 1), Complex(2, -1);
  const Matrix outer = v * v.adjoint();
  const Matrix expected = outer / std::pow(v.squaredNorm(), 2);
  CHECK((pseudo_inverse(outer) - expected).norm() <= 1e-10);
}

TEST_CASE("evaluate_detector checks side info") {
  const Matrix x = Matrix::Identity(2, 2);
  KnownSideInfo side;
  CHECK_THROWS_AS(evaluate_detector(DetectorKind::Opt, x, side), ConfigError);
  side.template_matrix = x;
  CHECK_THROWS_AS(evaluate_detector(DetectorKind::Opt, x, side), ConfigError);
  side.noise_cov = Matrix::Identity(2, 2);
  CHECK(evaluate_detector(DetectorKind::Opt, x, side) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK(evaluate_detector(DetectorKind::T1, x, side) ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK(detector_from_name("t3_rao") == DetectorKind::T3Rao);
  CHECK(detector_name(DetectorKind::T1LowSnr) == std::string("t1_low_snr"));
  CHECK_THROWS_AS(detector_from_name("bogus"), ConfigError);
}
