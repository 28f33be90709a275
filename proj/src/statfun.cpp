#include "irsdetect/statfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace irsdetect {

namespace {

constexpr double kQSaturation = 40.0;

double poisson_log_pmf(int k, double mean) {
  return k * std::log(mean) - mean - std::lgamma(double(k) + 1.0);
}

// Lower regularized gamma by power series; valid and fast for x < a + 1.
double gamma_lower_series(double a, double x, const Tolerance& tol) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= tol.max_terms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * tol.rel_tol) {
      return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
    }
  }
  throw ConvergenceError("gamma_lower_series: no convergence",
                         sum * std::exp(a * std::log(x) - x - std::lgamma(a)));
}

// Upper regularized gamma by Lentz continued fraction; for x >= a + 1.
double gamma_upper_cf(double a, double x, const Tolerance& tol) {
  const double tiny = std::numeric_limits<double>::min() / tol.rel_tol;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= tol.max_terms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < tol.rel_tol) {
      return h * std::exp(a * std::log(x) - x - std::lgamma(a));
    }
  }
  throw ConvergenceError("gamma_upper_cf: no convergence",
                         h * std::exp(a * std::log(x) - x - std::lgamma(a)));
}

// Continued fraction for the incomplete beta (Lentz).
double beta_cf(double a, double b, double x, const Tolerance& tol) {
  const double tiny = std::numeric_limits<double>::min() / tol.rel_tol;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= tol.max_terms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < tol.rel_tol) return h;
  }
  throw ConvergenceError("beta_cf: no convergence", h);
}

}  // namespace

void Tolerance::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_terms < 1) {
    throw DomainError("Tolerance: abs_tol > 0, rel_tol > 0, max_terms >= 1 required");
  }
}

double q_function(double x) {
  if (!std::isfinite(x)) throw DomainError("q_function: non-finite input");
  if (x >= kQSaturation) return 0.0;
  if (x <= -kQSaturation) return 1.0;
  return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double inv_q(double p, Tolerance tol) {
  tol.validate();
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inv_q: p must be in (0,1)");
  return detail::solve_monotone([](double x) { return -q_function(x); },
                                -kQSaturation, kQSaturation, -p, tol);
}

double gamma_lower_reg(double a, double x, Tolerance tol) {
  tol.validate();
  if (!(a > 0.0)) throw DomainError("gamma_lower_reg: a must be positive");
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_lower_reg: x must be finite and non-negative");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_lower_series(a, x, tol);
  return 1.0 - gamma_upper_cf(a, x, tol);
}

double gamma_upper_reg(double a, double x, Tolerance tol) {
  tol.validate();
  if (!(a > 0.0)) throw DomainError("gamma_upper_reg: a must be positive");
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_upper_reg: x must be finite and non-negative");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_lower_series(a, x, tol);
  return gamma_upper_cf(a, x, tol);
}

double inv_gamma_upper_reg(double a, double p, Tolerance tol) {
  tol.validate();
  if (!(a > 0.0)) throw DomainError("inv_gamma_upper_reg: a must be positive");
  if (!(p > 0.0 && p <= 1.0)) {
    throw DomainError("inv_gamma_upper_reg: p must be in (0,1]");
  }
  if (p == 1.0) return 0.0;
  // Expand the bracket until the tail drops below p.
  double hi = a + 10.0;
  while (gamma_upper_reg(a, hi, tol) > p) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("inv_gamma_upper_reg: bracket overflow");
  }
  return detail::solve_monotone(
      [&](double x) { return -gamma_upper_reg(a, x, tol); }, 0.0, hi, -p, tol);
}

double reg_inc_beta(double a, double b, double x, Tolerance tol) {
  tol.validate();
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("reg_inc_beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("reg_inc_beta: x must be in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x, tol) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x, tol) / b;
}

double inv_reg_inc_beta(double a, double b, double p, Tolerance tol) {
  tol.validate();
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("inv_reg_inc_beta: p must be in [0,1]");
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return detail::solve_monotone(
      [&](double x) { return reg_inc_beta(a, b, x, tol); }, 0.0, 1.0, p, tol);
}

double marcum_q(int order, double a, double b, Tolerance tol) {
  tol.validate();
  if (order < 1) throw DomainError("marcum_q: order must be >= 1");
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw DomainError("marcum_q: a and b must be non-negative");
  }
  if (b == 0.0) return 1.0;
  const double h = 0.5 * a * a;  // Poisson mean
  const double y = 0.5 * b * b;  // gamma tail argument
  if (h == 0.0) return gamma_upper_reg(order, y, tol);

  // k = 0 inner tail, then advance Q(M+k, y) by the recurrence
  // Q(n+1,y) = Q(n,y) + y^n e^-y / n!.
  double inner = gamma_upper_reg(order, y, tol);
  double sum = 0.0;
  double pois_mass = 0.0;
  for (int k = 0; k <= tol.max_terms; ++k) {
    const double w = std::exp(poisson_log_pmf(k, h));
    sum += w * inner;
    pois_mass += w;
    const double remainder = 1.0 - pois_mass;  // bounds the truncated tail
    if (remainder <= tol.abs_tol || remainder <= tol.rel_tol * sum) {
      return std::min(sum, 1.0);
    }
    inner += std::exp((order + k) * std::log(y) - y -
                      std::lgamma(double(order + k) + 1.0));
    if (inner > 1.0) inner = 1.0;
  }
  throw ConvergenceError("marcum_q: series did not converge within max_terms",
                         sum);
}

double central_chi2_cdf(int dof, double x, Tolerance tol) {
  if (dof < 1) throw DomainError("central_chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return gamma_lower_reg(0.5 * dof, 0.5 * x, tol);
}

double noncentral_chi2_cdf(int dof, double lambda, double x, Tolerance tol) {
  if (dof < 1) throw DomainError("noncentral_chi2_cdf: dof must be >= 1");
  if (dof % 2 != 0) {
    throw DomainError("noncentral_chi2_cdf: dof must be even (Marcum-Q route)");
  }
  if (!(lambda >= 0.0)) {
    throw DomainError("noncentral_chi2_cdf: lambda must be non-negative");
  }
  if (x <= 0.0) return 0.0;
  return 1.0 - marcum_q(dof / 2, std::sqrt(lambda), std::sqrt(x), tol);
}

double fisher_cdf(int d1, int d2, double x, Tolerance tol) {
  if (d1 < 1 || d2 < 1) throw DomainError("fisher_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  const double z = d1 * x / (d1 * x + d2);
  return reg_inc_beta(0.5 * d1, 0.5 * d2, z, tol);
}

double dist_cdf(const Dist& kind, double x, Tolerance tol) {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, CentralChi2>) {
          return central_chi2_cdf(k.dof, x, tol);
        } else if constexpr (std::is_same_v<T, NoncentralChi2>) {
          return noncentral_chi2_cdf(k.dof, k.lambda, x, tol);
        } else {
          return fisher_cdf(k.d1, k.d2, x, tol);
        }
      },
      kind);
}

}  // namespace irsdetect
