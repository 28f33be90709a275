#pragma once

// Independent reference implementations used only to check the library.
// Everything here is computed by adaptive quadrature or direct series,
// deliberately avoiding the code paths under test.

namespace irsdetect::oracles {

/// Adaptive Simpson integration with relative tolerance.
double integrate(double (*f)(double, const void*), const void* ctx, double lo,
                 double hi, double rel_tol);

/// Gaussian tail by quadrature of the density.
double q_function(double x);

/// Regularized upper incomplete gamma by quadrature.
double gamma_upper_reg(double a, double x);

/// Regularized incomplete beta by quadrature (a, b >= 1).
double reg_inc_beta(double a, double b, double x);

/// Generalized Marcum Q by quadrature of its defining integral, using
/// std::cyl_bessel_i for the kernel.
double marcum_q(int order, double a, double b);

}  // namespace irsdetect::oracles
