#pragma once

#include <cstdint>
#include <vector>

#include "irsdetect/rng.hpp"

namespace irsdetect::validation {

/// Two-sample Kolmogorov-Smirnov statistic (max ECDF distance).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Critical KS distance at significance alpha for sample sizes n and m.
double ks_critical(double alpha, std::size_t n, std::size_t m);

/// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// P{sample from h1 > sample from h0}: the area under the ROC.
double roc_area(std::vector<double> h0, std::vector<double> h1);

/// Sample mean / variance (unbiased).
double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);

/// Pearson correlation.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

// Reference-law samplers for distribution checks. Each derives its own
// substreams from (seed, index) so draws are order independent.
std::vector<double> sample_scaled_chi2(long n, double scale, int dof,
                                       std::uint64_t seed);
/// scale * F(d1, d2) with integer degrees of freedom.
std::vector<double> sample_scaled_fisher(long n, double scale, int d1, int d2,
                                         std::uint64_t seed);
/// scale * Beta(a, b) with integer parameters.
std::vector<double> sample_scaled_beta(long n, double scale, int a, int b,
                                       std::uint64_t seed);

}  // namespace irsdetect::validation
