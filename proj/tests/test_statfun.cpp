#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irsdetect/statfun.hpp"
#include "oracles.hpp"

using namespace irsdetect;

TEST_CASE("q_function basics") {
  CHECK(q_function(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q_function(40.0) == 0.0);
  CHECK(q_function(100.0) == 0.0);
  CHECK(q_function(-40.0) == 1.0);
  // Frozen from the quadrature oracle.
  CHECK(q_function(1.0) == doctest::Approx(0.15865525393146).epsilon(1e-12));
  CHECK_THROWS_AS(q_function(std::nan("")), DomainError);
  CHECK_THROWS_AS(q_function(INFINITY), DomainError);
}

TEST_CASE("q_function is monotone non-increasing") {
  double prev = 1.0;
  for (double x = -12.0; x <= 12.0; x += 0.25) {
    const double q = q_function(x);
    CHECK(q <= prev + 1e-15);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    prev = q;
  }
}

TEST_CASE("inv_q") {
  CHECK(inv_q(0.5) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(inv_q(q_function(2.0)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(inv_q(0.15865525393146) == doctest::Approx(1.0).epsilon(1e-6));
  for (double p : {1e-6, 1e-3, 0.2, 0.7, 0.999}) {
    CHECK(q_function(inv_q(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(inv_q(0.0), DomainError);
  CHECK_THROWS_AS(inv_q(1.0), DomainError);
  CHECK_THROWS_AS(inv_q(-0.3), DomainError);
}

TEST_CASE("gamma_upper_reg values and round trips") {
  CHECK(gamma_upper_reg(2.0, 0.0) == 1.0);
  CHECK(gamma_upper_reg(1.0, 1.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(inv_gamma_upper_reg(1.0, std::exp(-1.0)) ==
        doctest::Approx(1.0).epsilon(1e-9));
  for (double a : {0.5, 1.0, 3.5, 10.0}) {
    for (double p : {0.999, 0.6, 0.1, 1e-4}) {
      const double x = inv_gamma_upper_reg(a, p);
      CHECK(gamma_upper_reg(a, x) == doctest::Approx(p).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(gamma_upper_reg(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(gamma_upper_reg(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(gamma_upper_reg(1.0, -0.5), DomainError);
  CHECK_THROWS_AS(inv_gamma_upper_reg(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(inv_gamma_upper_reg(1.0, 1.5), DomainError);
}

TEST_CASE("gamma_upper_reg non-increasing in x") {
  for (double a : {0.7, 2.0, 8.0}) {
    double prev = 1.0;
    for (double x = 0.0; x < 30.0; x += 0.5) {
      const double q = gamma_upper_reg(a, x);
      CHECK(q <= prev + 1e-14);
      prev = q;
    }
  }
}

TEST_CASE("reg_inc_beta") {
  CHECK(reg_inc_beta(3.0, 5.0, 0.0) == 0.0);
  CHECK(reg_inc_beta(3.0, 5.0, 1.0) == 1.0);
  // Closed form I(1,b;x) = 1 - (1-x)^b.
  CHECK(reg_inc_beta(1.0, 2.0, 1.0 / 3.0) ==
        doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  double prev = 0.0;
  for (double x = 0.0; x <= 1.0; x += 0.02) {
    const double v = reg_inc_beta(2.5, 4.0, x);
    CHECK(v >= prev - 1e-14);
    prev = v;
  }
  for (double p : {0.01, 0.4, 0.97}) {
    const double x = inv_reg_inc_beta(2.5, 4.0, p);
    CHECK(reg_inc_beta(2.5, 4.0, x) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(reg_inc_beta(0.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.5), DomainError);
}

TEST_CASE("marcum_q") {
  CHECK(marcum_q(3, 1.7, 0.0) == 1.0);
  CHECK(marcum_q(1, 0.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
  // Frozen from the quadrature oracle.
  CHECK(marcum_q(1, 1.0, 1.0) == doctest::Approx(0.7328798037968).epsilon(1e-10));
  CHECK_THROWS_AS(marcum_q(0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(marcum_q(1, -1.0, 1.0), DomainError);

  SUBCASE("identity against gamma at a = 0") {
    for (int order = 1; order <= 5; ++order) {
      for (double b : {0.3, 1.0, 2.5, 5.0}) {
        CHECK(marcum_q(order, 0.0, b) ==
              doctest::Approx(gamma_upper_reg(order, 0.5 * b * b))
                  .epsilon(1e-10));
      }
    }
  }
  SUBCASE("monotone in a and b") {
    for (int order : {1, 4}) {
      double prev = 1.0;
      for (double b = 0.0; b < 8.0; b += 0.25) {
        const double v = marcum_q(order, 1.3, b);
        CHECK(v <= prev + 1e-12);
        prev = v;
      }
      prev = 0.0;
      for (double a = 0.0; a < 8.0; a += 0.25) {
        const double v = marcum_q(order, a, 2.0);
        CHECK(v >= prev - 1e-12);
        prev = v;
      }
    }
  }
  SUBCASE("max_terms failure carries the partial sum") {
    Tolerance tight;
    tight.max_terms = 2;
    try {
      marcum_q(2, 6.0, 6.0, tight);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.partial >= 0.0);
      CHECK(e.partial <= 1.0);
    }
  }
}

TEST_CASE("dist_cdf") {
  CHECK(central_chi2_cdf(2, 2.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
  // Zero non-centrality collapses onto the central law.
  for (double x = 0.5; x < 20.0; x += 1.5) {
    CHECK(noncentral_chi2_cdf(8, 0.0, x) ==
          doctest::Approx(central_chi2_cdf(8, x)).epsilon(1e-9));
  }
  CHECK(fisher_cdf(2, 4, 1.0) == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  CHECK(dist_cdf(CentralChi2{2}, 2.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
  CHECK(dist_cdf(NoncentralChi2{4, 1.0}, 3.0) ==
        doctest::Approx(1.0 - marcum_q(2, 1.0, std::sqrt(3.0))).epsilon(1e-12));
  CHECK(dist_cdf(FisherF{2, 4}, 1.0) == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  CHECK_THROWS_AS(noncentral_chi2_cdf(3, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(central_chi2_cdf(0, 1.0), DomainError);
}

TEST_CASE("CDFs stay in [0,1] and non-decreasing on grids") {
  for (double x = 0.0; x < 40.0; x += 0.8) {
    for (const Dist& d :
         {Dist(CentralChi2{6}), Dist(NoncentralChi2{6, 4.0}), Dist(FisherF{6, 9})}) {
      const double lo = dist_cdf(d, x);
      const double hi = dist_cdf(d, x + 0.8);
      CHECK(lo >= 0.0);
      CHECK(hi <= 1.0);
      CHECK(hi >= lo - 1e-12);
    }
  }
}

TEST_CASE("oracle agreement on log grids") {
  // 1e-8 relative agreement with independent quadrature oracles.
  SUBCASE("q_function") {
    for (int i = 0; i < 50; ++i) {
      const double x = std::pow(10.0, -2.0 + 3.0 * i / 49.0);  // 0.01 .. 10
      const double ours = q_function(x);
      const double ref = oracles::q_function(x);
      CHECK(std::abs(ours - ref) <= 1e-8 * ref);
    }
  }
  SUBCASE("gamma_upper_reg") {
    for (int i = 0; i < 50; ++i) {
      const double a = std::pow(10.0, -0.3 + 1.3 * (i % 10) / 9.0);
      const double x = std::pow(10.0, -1.5 + 2.7 * i / 49.0);
      const double ours = gamma_upper_reg(a, x);
      const double ref = oracles::gamma_upper_reg(a, x);
      CHECK(std::abs(ours - ref) <= 1e-8 * std::max(ref, 1e-300));
    }
  }
  SUBCASE("reg_inc_beta") {
    for (int i = 0; i < 50; ++i) {
      const double a = 1.0 + 9.0 * (i % 7) / 6.0;
      const double b = 1.0 + 14.0 * (i % 5) / 4.0;
      const double x = 0.02 + 0.96 * i / 49.0;
      const double ours = reg_inc_beta(a, b, x);
      const double ref = oracles::reg_inc_beta(a, b, x);
      CHECK(std::abs(ours - ref) <= 1e-8 * std::max(ref, 1e-300));
    }
  }
  SUBCASE("marcum_q") {
    for (int i = 0; i < 50; ++i) {
      const int order = 1 + (i % 5);
      const double a = std::pow(10.0, -1.0 + 1.6 * (i % 11) / 10.0);
      const double b = std::pow(10.0, -1.0 + 1.6 * i / 49.0);
      const double ours = marcum_q(order, a, b);
      const double ref = oracles::marcum_q(order, a, b);
      CHECK(std::abs(ours - ref) <= 1e-8 * std::max(ref, 1e-300));
    }
  }
}

TEST_CASE("tolerance validation") {
  Tolerance bad;
  bad.max_terms = 0;
  CHECK_THROWS_AS(gamma_upper_reg(1.0, 1.0, bad), DomainError);
  bad = Tolerance{};
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(marcum_q(1, 1.0, 1.0, bad), DomainError);
}
