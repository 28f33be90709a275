#include "irsdetect/rng.hpp"

#include <cmath>

namespace irsdetect {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = kTwoPi * u2;
  cached_ = r * std::sin(angle);
  has_cached_ = true;
  return r * std::cos(angle);
}

Complex RngStream::complex_normal() {
  const double inv_sqrt2 = 0.70710678118654752440;
  const double re = normal();
  const double im = normal();
  return Complex(re * inv_sqrt2, im * inv_sqrt2);
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("RngStream::gamma: shape must be positive");
  if (shape < 1.0) {
    const double u = 1.0 - uniform();  // (0,1]
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform();  // (0,1]
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::nakagami_amplitude(double m) {
  if (!(m >= 0.5)) throw DomainError("nakagami_amplitude: shape must be >= 0.5");
  return std::sqrt(gamma(m) / m);
}

Complex RngStream::nakagami_fading(double m) {
  const double r = nakagami_amplitude(m);
  const double phase = uniform(0.0, kTwoPi);
  return Complex(r * std::cos(phase), r * std::sin(phase));
}

}  // namespace irsdetect
