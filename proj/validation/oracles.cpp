#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace irsdetect::oracles {

namespace {

struct SimpsonState {
  double (*f)(double, const void*);
  const void* ctx;
  double rel_tol;
  double scale;  // magnitude reference for the relative test
};

double simpson(const SimpsonState& s, double a, double m, double b, double fa,
               double fm, double fb, double whole, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = s.f(lm, s.ctx);
  const double frm = s.f(rm, s.ctx);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) return left + right + delta / 15.0;
  // Written so a NaN delta stops the recursion rather than looping.
  if (!(std::abs(delta) >
        15.0 * s.rel_tol * std::max(s.scale, std::abs(left + right)))) {
    return left + right + delta / 15.0;
  }
  return simpson(s, a, lm, m, fa, flm, fm, left, depth - 1) +
         simpson(s, m, rm, b, fm, frm, fb, right, depth - 1);
}

}  // namespace

double integrate(double (*f)(double, const void*), const void* ctx, double lo,
                 double hi, double rel_tol) {
  if (!(hi > lo)) return 0.0;
  SimpsonState s{f, ctx, rel_tol, 0.0};
  // Seed the magnitude scale with a coarse pass over a few panels.
  const int panels = 32;
  double coarse = 0.0;
  const double h = (hi - lo) / panels;
  double prev = f(lo, ctx);
  for (int i = 1; i <= panels; ++i) {
    const double x = lo + i * h;
    const double cur = f(x, ctx);
    coarse += 0.5 * h * (prev + cur);
    prev = cur;
  }
  s.scale = std::abs(coarse);
  double total = 0.0;
  double a = lo;
  double fa = f(a, ctx);
  for (int i = 1; i <= panels; ++i) {
    const double b = lo + i * h;
    const double m = 0.5 * (a + b);
    const double fb = f(b, ctx);
    const double fm = f(m, ctx);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson(s, a, m, b, fa, fm, fb, whole, 48);
    a = b;
    fa = fb;
  }
  return total;
}

namespace {

double gauss_density(double t, const void*) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
}

struct GammaCtx {
  double a;
  double log_gamma_a;
};

double gamma_integrand(double t, const void* ctx) {
  const auto* g = static_cast<const GammaCtx*>(ctx);
  return std::exp((g->a - 1.0) * std::log(t) - t - g->log_gamma_a);
}

struct BetaCtx {
  double a;
  double b;
  double log_beta;
};

double beta_integrand(double t, const void* ctx) {
  const auto* p = static_cast<const BetaCtx*>(ctx);
  // Endpoint limits for a == 1 or b == 1 avoid 0 * log(0).
  double log_val = -p->log_beta;
  if (p->a != 1.0) {
    if (t <= 0.0) return 0.0;
    log_val += (p->a - 1.0) * std::log(t);
  }
  if (p->b != 1.0) {
    if (t >= 1.0) return 0.0;
    log_val += (p->b - 1.0) * std::log1p(-t);
  }
  return std::exp(log_val);
}

struct MarcumCtx {
  int order;
  double a;
};

double marcum_integrand(double x, const void* ctx) {
  const auto* m = static_cast<const MarcumCtx*>(ctx);
  const double nu = m->order - 1;
  if (m->a < 1e-12) {
    // Limit of x (x/a)^(M-1) I_{M-1}(a x) as a -> 0.
    return std::exp((2.0 * m->order - 1.0) * std::log(x) - 0.5 * x * x -
                    (m->order - 1.0) * std::log(2.0) -
                    std::lgamma(double(m->order)));
  }
  return x * std::pow(x / m->a, nu) *
         std::exp(-0.5 * (x * x + m->a * m->a)) * std::cyl_bessel_i(nu, m->a * x);
}

}  // namespace

double q_function(double x) {
  if (x < 0.0) return 1.0 - q_function(-x);
  return integrate(gauss_density, nullptr, x, x + 14.0, 1e-13);
}

double gamma_upper_reg(double a, double x) {
  if (x <= 0.0) return 1.0;
  GammaCtx ctx{a, std::lgamma(a)};
  const double upper = std::max(x, a) + 90.0 + 10.0 * std::sqrt(a);
  return integrate(gamma_integrand, &ctx, x, upper, 1e-13);
}

double reg_inc_beta(double a, double b, double x) {
  if (a < 1.0 || b < 1.0) {
    throw std::invalid_argument("oracle reg_inc_beta requires a, b >= 1");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  BetaCtx ctx{a, b,
              std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)};
  return integrate(beta_integrand, &ctx, 0.0, x, 1e-13);
}

double marcum_q(int order, double a, double b) {
  if (b <= 0.0) return 1.0;
  MarcumCtx ctx{order, a};
  const double upper = b + a + 45.0 + 2.0 * order;
  return integrate(marcum_integrand, &ctx, b, upper, 1e-13);
}

}  // namespace irsdetect::oracles
