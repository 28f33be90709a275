#pragma once

#include <cmath>
#include <variant>

#include "irsdetect/types.hpp"

namespace irsdetect {

/// Convergence control for series evaluation and inverse solves.
struct Tolerance {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_terms = 10000;

  void validate() const;
};

/// Gaussian tail probability Q(x) = P{N(0,1) > x}.
/// Saturates to exactly 0/1 for |x| >= 40 where erfc underflows.
double q_function(double x);

/// Inverse of q_function on (0,1). Bracketing bisection refined by
/// secant steps; thresholds are computed once per scenario so
/// robustness is preferred over speed.
double inv_q(double p, Tolerance tol = {});

/// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
double gamma_upper_reg(double a, double x, Tolerance tol = {});

/// Regularized lower incomplete gamma P(a,x) = 1 - Q(a,x), computed on
/// its own branch so small values keep relative accuracy.
double gamma_lower_reg(double a, double x, Tolerance tol = {});

/// Solves gamma_upper_reg(a, x) = p for x, p in (0,1].
double inv_gamma_upper_reg(double a, double p, Tolerance tol = {});

/// Regularized incomplete beta I(a,b;x) on x in [0,1].
double reg_inc_beta(double a, double b, double x, Tolerance tol = {});

/// Solves reg_inc_beta(a, b, x) = p for x, p in [0,1].
double inv_reg_inc_beta(double a, double b, double p, Tolerance tol = {});

/// Generalized Marcum Q_M(a,b) for integer order M >= 1.
///
/// Evaluated as the Poisson mixture of regularized gamma tails,
///   Q_M(a,b) = sum_k pois(k; a^2/2) * Q(M+k, b^2/2),
/// a term-wise positive regrouping of the canonical Bessel series.
/// Truncation is bounded by the unaccumulated Poisson mass; exceeding
/// tol.max_terms raises ConvergenceError carrying the partial sum.
double marcum_q(int order, double a, double b, Tolerance tol = {});

struct CentralChi2 {
  int dof;
};
struct NoncentralChi2 {
  int dof;  // must be even: the CDF is computed through Marcum Q
  double lambda;
};
struct FisherF {
  int d1;
  int d2;
};
using Dist = std::variant<CentralChi2, NoncentralChi2, FisherF>;

double central_chi2_cdf(int dof, double x, Tolerance tol = {});
double noncentral_chi2_cdf(int dof, double lambda, double x, Tolerance tol = {});
double fisher_cdf(int d1, int d2, double x, Tolerance tol = {});
double dist_cdf(const Dist& kind, double x, Tolerance tol = {});

namespace detail {

/// Finds x in [lo, hi] with f(x) = target for monotone f. Bisection
/// with a secant refinement once the bracket is tight.
template <typename F>
double solve_monotone(F&& f, double lo, double hi, double target,
                      const Tolerance& tol) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) {
    throw NumericError("solve_monotone: target not bracketed");
  }
  for (int it = 0;
       it < 200 && hi - lo > tol.abs_tol + tol.rel_tol * std::abs(lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - target;
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  double x = lo;
  for (int it = 0; it < 4; ++it) {
    const double denom = fhi - flo;
    if (denom == 0.0) break;
    const double cand = lo - flo * (hi - lo) / denom;
    if (!(cand > lo && cand < hi)) break;
    const double fc = f(cand) - target;
    x = cand;
    if (fc == 0.0) break;
    if (flo * fc < 0.0) {
      hi = cand;
      fhi = fc;
    } else {
      lo = cand;
      flo = fc;
    }
  }
  return x;
}

}  // namespace detail

}  // namespace irsdetect
