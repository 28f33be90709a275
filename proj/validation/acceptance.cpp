#include "acceptance.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "irsdetect/analytic.hpp"
#include "irsdetect/montecarlo.hpp"
#include "irsdetect/report.hpp"
#include "oracles.hpp"
#include "stats_tests.hpp"

namespace irsdetect::validation {

namespace {

std::string fmt(double v, int prec = 6) {
  std::ostringstream out;
  out.precision(prec);
  out << v;
  return out.str();
}

std::string pass_str(bool ok) { return ok ? "ok" : "FAIL"; }

ScenarioSpec reference_scenario(DetectorKind kind, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.config.antennas = 4;
  spec.config.devices = 6;
  spec.config.irs_elements = 16;
  spec.config.samples = 16;
  spec.config.base_seed = seed;
  spec.detector = kind;
  spec.snr_override_db = -5.0;
  return spec;
}

// -------------------------------------------------------------------------
// 1. Special functions against independent quadrature oracles.

CriterionResult criterion1(const AcceptanceOptions&) {
  CriterionResult res{1, "special functions agree with quadrature oracles", true, {}};
  const double gate = 1e-8;

  double worst_q = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = std::pow(10.0, -2.0 + 3.0 * i / 49.0);
    const double ref = oracles::q_function(x);
    worst_q = std::max(worst_q, std::abs(q_function(x) - ref) / ref);
  }
  double worst_g = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double a = std::pow(10.0, -0.3 + 1.3 * (i % 10) / 9.0);
    const double x = std::pow(10.0, -1.5 + 2.7 * i / 49.0);
    const double ref = oracles::gamma_upper_reg(a, x);
    worst_g = std::max(worst_g,
                       std::abs(gamma_upper_reg(a, x) - ref) / std::max(ref, 1e-300));
  }
  double worst_b = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double a = 1.0 + 9.0 * (i % 7) / 6.0;
    const double b = 1.0 + 14.0 * (i % 5) / 4.0;
    const double x = 0.02 + 0.96 * i / 49.0;
    const double ref = oracles::reg_inc_beta(a, b, x);
    worst_b = std::max(worst_b,
                       std::abs(reg_inc_beta(a, b, x) - ref) / std::max(ref, 1e-300));
  }
  double worst_m = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int order = 1 + (i % 5);
    const double a = std::pow(10.0, -1.0 + 1.6 * (i % 11) / 10.0);
    const double b = std::pow(10.0, -1.0 + 1.6 * i / 49.0);
    const double ref = oracles::marcum_q(order, a, b);
    worst_m = std::max(worst_m, std::abs(marcum_q(order, a, b) - ref) /
                                    std::max(ref, 1e-300));
  }
  res.pass = worst_q <= gate && worst_g <= gate && worst_b <= gate &&
             worst_m <= gate;
  res.lines.push_back("max relative error over 50-point log grids (gate 1e-08):");
  res.lines.push_back("  q_function      " + fmt(worst_q, 3) + " " + pass_str(worst_q <= gate));
  res.lines.push_back("  gamma_upper_reg " + fmt(worst_g, 3) + " " + pass_str(worst_g <= gate));
  res.lines.push_back("  reg_inc_beta    " + fmt(worst_b, 3) + " " + pass_str(worst_b <= gate));
  res.lines.push_back("  marcum_q        " + fmt(worst_m, 3) + " " + pass_str(worst_m <= gate));
  return res;
}

// -------------------------------------------------------------------------
// 2. Analytic vs empirical rates for the three thresholdable detectors.

struct RateCheck {
  double threshold;
  double pfa_ana, pfa_emp;
  double pd_ana, pd_emp;
  bool pfa_ok, pd_ok;
};

RateCheck check_rates(const std::vector<double>& h0, const std::vector<double>& h1,
                      double threshold, double pfa_ana, double pd_ana) {
  RateCheck c;
  c.threshold = threshold;
  c.pfa_ana = pfa_ana;
  c.pd_ana = pd_ana;
  const double n = double(h0.size());
  long fa = 0, det = 0;
  for (double s : h0) fa += s > threshold;
  for (double s : h1) det += s > threshold;
  c.pfa_emp = fa / n;
  c.pd_emp = det / n;
  const double pfa_band = 3.0 * std::sqrt(pfa_ana * (1.0 - pfa_ana) / n);
  const double pd_band = 3.0 * std::sqrt(pd_ana * (1.0 - pd_ana) / n);
  c.pfa_ok = std::abs(c.pfa_emp - pfa_ana) <= pfa_band;
  c.pd_ok = std::abs(c.pd_emp - pd_ana) <= pd_band;
  return c;
}

void append_rate_line(CriterionResult& res, const std::string& tag,
                      double target, const RateCheck& c, bool counts) {
  std::string line = "  " + tag + " target_pfa=" + fmt(target, 4) +
                     " pfa(ana/emp)=" + fmt(c.pfa_ana, 5) + "/" +
                     fmt(c.pfa_emp, 5) + " " + pass_str(c.pfa_ok) +
                     "  pd(ana/emp)=" + fmt(c.pd_ana, 5) + "/" +
                     fmt(c.pd_emp, 5) + " " + pass_str(c.pd_ok);
  if (!counts) line += "  [diagnostic only]";
  res.lines.push_back(line);
}

CriterionResult criterion2(const AcceptanceOptions& options) {
  CriterionResult res{2, "analytic vs empirical rates (Opt, T2, Rao)", true, {}};
  const long n = options.trials_pinned;
  const std::vector<double> targets{0.01, 0.05, 0.1, 0.2, 0.5};

  const ResolvedScenario opt =
      resolve_scenario(reference_scenario(DetectorKind::Opt, options.seed));
  const ResolvedScenario t2s =
      resolve_scenario(reference_scenario(DetectorKind::T2, options.seed));
  const ResolvedScenario rao =
      resolve_scenario(reference_scenario(DetectorKind::T3Rao, options.seed));
  const int m = opt.spec.config.antennas;
  const int l = opt.spec.config.samples;

  const auto opt_h0 = statistic_pool(opt, Hypothesis::H0, n, options.seed);
  const auto opt_h1 = statistic_pool(opt, Hypothesis::H1, n, options.seed);
  const auto t2_h0 = statistic_pool(t2s, Hypothesis::H0, n, options.seed);
  const auto t2_h1 = statistic_pool(t2s, Hypothesis::H1, n, options.seed);
  const auto rao_h0 = statistic_pool(rao, Hypothesis::H0, n, options.seed);
  const auto rao_h1 = statistic_pool(rao, Hypothesis::H1, n, options.seed);

  const Complex b = opt_b(*opt.side_info.template_matrix, opt.noise_cov);
  const double lambda = lambda_rao_from_model(
      rao.channel.composite *
          rao.powers_mw.cwiseSqrt().cast<Complex>().asDiagonal(),
      rao.signal.signal, rao.noise_cov, l);

  for (double p : targets) {
    const double tau = opt_threshold(p, b);
    const OptPerf perf = opt_perf(tau, b);
    const RateCheck c = check_rates(opt_h0, opt_h1, tau, perf.pfa, perf.pd);
    res.pass = res.pass && c.pfa_ok && c.pd_ok;
    append_rate_line(res, "opt   ", p, c, true);
  }
  for (double p : targets) {
    const double tau = t2_threshold(p, l, m);
    const T2Perf perf =
        t2_perf_from_cov(tau, t2s.noise_cov, t2s.signal.mean_vector, l);
    const RateCheck c = check_rates(t2_h0, t2_h1, tau, perf.pfa, perf.pd);
    res.pass = res.pass && c.pfa_ok && c.pd_ok;
    append_rate_line(res, "t2    ", p, c, true);
    // Exact non-central chi-square tail for white noise, for comparison
    // with the matched-gamma approximation above.
    const double sigma2 = t2s.noise_cov(0, 0).real();
    const double pd_exact = t2_pd_white_exact(
        tau, t2s.signal.mean_vector.squaredNorm(), sigma2, l, m);
    const RateCheck cx = check_rates(t2_h0, t2_h1, tau, perf.pfa, pd_exact);
    append_rate_line(res, "t2ncx2", p, cx, false);
  }
  for (double p : targets) {
    const double tau = rao_threshold_exact(p, l, m);
    const double pd_ana = rao_asymptotic(tau, lambda, m).pd;
    const RateCheck c =
        check_rates(rao_h0, rao_h1, tau, rao_pfa_exact(tau, l, m), pd_ana);
    res.pass = res.pass && c.pfa_ok && c.pd_ok;
    append_rate_line(res, "rao   ", p, c, true);
    // Same comparison against the null law that accounts for the
    // X1 / XX^H dependence.
    const double tau_beta = rao_threshold_null_beta(p, l, m);
    const RateCheck cb =
        check_rates(rao_h0, rao_h1, tau_beta, rao_pfa_null_beta(tau_beta, l, m),
                    rao_asymptotic(tau_beta, lambda, m).pd);
    append_rate_line(res, "raoNB ", p, cb, false);
  }
  return res;
}

// -------------------------------------------------------------------------
// 3. Null-distribution checks.

CriterionResult criterion3(const AcceptanceOptions& options) {
  CriterionResult res{3, "null distributions (t_opt moments, t2 / rao KS)", true, {}};
  const long n = options.trials_pinned;
  const std::uint64_t ref_seed = options.seed ^ 0xABCDEFull;

  const ResolvedScenario opt =
      resolve_scenario(reference_scenario(DetectorKind::Opt, options.seed));
  const int m = opt.spec.config.antennas;
  const int l = opt.spec.config.samples;

  const auto opt_h0 = statistic_pool(opt, Hypothesis::H0, n, options.seed);
  const double b = opt_b(*opt.side_info.template_matrix, opt.noise_cov).real();
  const double mean_emp = mean(opt_h0);
  const double var_emp = variance(opt_h0);
  const double mean_se = std::sqrt(2.0 * b / double(n));
  const bool mean_ok = std::abs(mean_emp) <= 3.0 * mean_se;
  const bool var_ok = std::abs(var_emp - 2.0 * b) <= 0.02 * 2.0 * b;
  res.lines.push_back("  t_opt H0 mean " + fmt(mean_emp, 4) + " (3se " +
                      fmt(3.0 * mean_se, 4) + ") " + pass_str(mean_ok) +
                      "; var/2Re(b) " + fmt(var_emp / (2.0 * b), 5) + " " +
                      pass_str(var_ok));

  const ResolvedScenario t2s =
      resolve_scenario(reference_scenario(DetectorKind::T2, options.seed));
  const auto t2_h0 = statistic_pool(t2s, Hypothesis::H0, n, options.seed);
  const auto chi2_ref =
      sample_scaled_chi2(n, 0.5 * l, 2 * m, ref_seed);
  const double d_t2 = ks_two_sample(t2_h0, chi2_ref);
  const double crit = ks_critical(0.01, std::size_t(n), std::size_t(n));
  const bool t2_ok = d_t2 <= crit;
  res.lines.push_back("  t2 H0 vs (L/2)chi2_2M: KS " + fmt(d_t2, 4) +
                      " (crit " + fmt(crit, 4) + ") " + pass_str(t2_ok));

  const ResolvedScenario rao =
      resolve_scenario(reference_scenario(DetectorKind::T3Rao, options.seed));
  const auto rao_h0 = statistic_pool(rao, Hypothesis::H0, n, options.seed);
  const double fisher_scale = 2.0 * m * l / double(l - m + 1);
  const auto fisher_ref = sample_scaled_fisher(n, fisher_scale, 2 * m,
                                               2 * (l - m + 1), ref_seed + 1);
  const double d_rao = ks_two_sample(rao_h0, fisher_ref);
  const bool rao_ok = d_rao <= crit;
  res.lines.push_back("  rao H0 vs scaled Fisher form: KS " + fmt(d_rao, 4) +
                      " (crit " + fmt(crit, 4) + ") " + pass_str(rao_ok));
  const auto beta_ref =
      sample_scaled_beta(n, 2.0 * l, m, l - m, ref_seed + 2);
  const double d_beta = ks_two_sample(rao_h0, beta_ref);
  res.lines.push_back("  rao H0 vs 2L*Beta(M,L-M): KS " + fmt(d_beta, 4) +
                      " (crit " + fmt(crit, 4) + ") " + pass_str(d_beta <= crit) +
                      "  [diagnostic only]");

  res.pass = mean_ok && var_ok && t2_ok && rao_ok;
  return res;
}

// -------------------------------------------------------------------------
// 4. Matched-gamma moments for t2 under the alternative.

CriterionResult criterion4(const AcceptanceOptions& options) {
  CriterionResult res{4, "t2 alternative moments match the fitted gamma", true, {}};
  ScenarioSpec spec = reference_scenario(DetectorKind::T2, options.seed);
  spec.config.antennas = 2;
  spec.config.devices = 3;
  spec.config.samples = 16;
  const ResolvedScenario rs = resolve_scenario(spec);
  const int l = rs.spec.config.samples;

  const auto h1 = statistic_pool(rs, Hypothesis::H1, options.trials_pinned,
                                 options.seed);
  const double mean_emp = mean(h1);
  const double var_emp = variance(h1);

  const T2Perf fitted = t2_perf_from_cov(1.0, rs.noise_cov,
                                         rs.signal.mean_vector, l);
  const double mean_fit = fitted.theta1 * fitted.beta1;
  const double var_fit = 2.0 * fitted.theta1 * fitted.theta1 * fitted.beta1;
  const bool mean_ok = std::abs(mean_emp - mean_fit) <= 0.03 * mean_fit;
  const bool var_ok = std::abs(var_emp - var_fit) <= 0.03 * var_fit;
  res.lines.push_back("  mean emp/fit " + fmt(mean_emp, 6) + "/" +
                      fmt(mean_fit, 6) + " " + pass_str(mean_ok));
  res.lines.push_back("  var  emp/fit " + fmt(var_emp, 6) + "/" +
                      fmt(var_fit, 6) + " " + pass_str(var_ok));

  // Regression guard: the published beta1 expression must fail the same
  // moment check (it misses the no-signal limit).
  const T2Perf printed = t2_perf_from_cov(1.0, rs.noise_cov,
                                          rs.signal.mean_vector, l,
                                          Beta1Form::AsPublished);
  const double mean_printed = printed.theta1 * printed.beta1;
  const bool printed_fails =
      std::abs(mean_emp - mean_printed) > 0.03 * mean_printed;
  res.lines.push_back("  published-form mean prediction " + fmt(mean_printed, 6) +
                      " deviates " + pass_str(printed_fails) +
                      " (regression: expected to fail the 3% check)");
  res.pass = mean_ok && var_ok && printed_fails;
  return res;
}

// -------------------------------------------------------------------------
// 5. Score covariance against the analytic information block.

CriterionResult criterion5(const AcceptanceOptions& options) {
  CriterionResult res{5, "score covariance matches the information block", true, {}};
  ScenarioSpec spec = reference_scenario(DetectorKind::T3Rao, options.seed);
  spec.config.antennas = 2;
  spec.config.devices = 1;
  spec.config.samples = 8;
  const ResolvedScenario rs = resolve_scenario(spec);
  const int m = rs.spec.config.antennas;
  const int l = rs.spec.config.samples;
  const Vector& s = rs.signal.signal;

  Eigen::LLT<Matrix> llt(rs.noise_cov);
  const Matrix cov_inv = llt.solve(Matrix::Identity(m, m));
  const Matrix chol = llt.matrixL();

  const long n = options.trials_pinned;
  const int dim = m * int(s.size());
  Matrix acc = Matrix::Zero(dim, dim);
  // Score of the gain block at the true parameters: the residual is the
  // raw noise, so draw it directly.
  for (long t = 0; t < n; ++t) {
    RngStream stream = RngStream::substream(options.seed, 0x50000 + t);
    Matrix noise(m, l);
    for (int c = 0; c < l; ++c) {
      for (int r = 0; r < m; ++r) noise(r, c) = stream.complex_normal();
    }
    noise = chol * noise;
    const Matrix score_matrix = cov_inv * noise.rowwise().sum() * s.adjoint();
    const Vector score = Eigen::Map<const Vector>(score_matrix.data(), dim);
    acc += score * score.adjoint();
  }
  acc /= double(n);

  const FimBlocks blocks = fim_blocks(s, rs.noise_cov, l);
  const double err = (acc - blocks.gain_block).norm() / blocks.gain_block.norm();
  res.pass = err <= 0.05;
  res.lines.push_back("  relative Frobenius error " + fmt(err, 4) +
                      " (gate 0.05) " + pass_str(res.pass));
  return res;
}

// -------------------------------------------------------------------------
// 6. Numerator/denominator correlation of t1.

CriterionResult criterion6(const AcceptanceOptions& options) {
  CriterionResult res{6, "t1 numerator/denominator correlation", true, {}};
  ScenarioSpec spec = reference_scenario(DetectorKind::T1, options.seed);
  spec.config.antennas = 2;
  spec.config.devices = 2;
  spec.config.samples = 8;
  spec.snr_override_db = 0.0;
  const ResolvedScenario rs = resolve_scenario(spec);
  const int m = rs.spec.config.antennas;
  const int l = rs.spec.config.samples;
  const Matrix tmpl = template_matrix(rs.signal, l);
  const double trace_mm = tmpl.squaredNorm();
  const double sigma2 = rs.noise_cov(0, 0).real();
  const Matrix chol = Eigen::LLT<Matrix>(rs.noise_cov).matrixL();

  const long n = options.trials_pinned;
  const auto count = static_cast<std::size_t>(n);
  std::vector<double> w1(count), v1(count);
  std::vector<double> w0(count), v0(count);
  parallel_for_index(n, [&](long t) {
    RngStream stream = RngStream::substream(options.seed, 0x60000 + t);
    Matrix x(m, l);
    for (int c = 0; c < l; ++c) {
      for (int r = 0; r < m; ++r) x(r, c) = stream.complex_normal();
    }
    x = chol * x;
    const auto wv = [&](const Matrix& data) {
      const double cross =
          2.0 * (tmpl.conjugate().cwiseProduct(data)).sum().real();
      return std::pair<double, double>(cross - trace_mm, data.squaredNorm());
    };
    const auto [w_null, v_null] = wv(x);
    w0[std::size_t(t)] = w_null;
    v0[std::size_t(t)] = v_null;
    const auto [w_alt, v_alt] = wv(x + tmpl);
    w1[std::size_t(t)] = w_alt;
    v1[std::size_t(t)] = v_alt;
  });

  const double rho_emp = correlation(w1, v1);
  const double rho_ana =
      t1_num_den_correlation(trace_mm, sigma2, l, m).rho;
  const double rho_null = correlation(w0, v0);
  const bool alt_ok = std::abs(rho_emp - rho_ana) <= 0.05;
  const bool null_ok = std::abs(rho_null) < 0.02;
  res.lines.push_back("  H1 rho emp/ana " + fmt(rho_emp, 4) + "/" +
                      fmt(rho_ana, 4) + " " + pass_str(alt_ok));
  res.lines.push_back("  H0 |rho| " + fmt(std::abs(rho_null), 4) +
                      " (gate 0.02) " + pass_str(null_ok));
  res.pass = alt_ok && null_ok;
  return res;
}

// -------------------------------------------------------------------------
// 7. Low-SNR equivalence of the blind GLRT and the score test.

CriterionResult criterion7(const AcceptanceOptions& options) {
  CriterionResult res{7, "blind GLRT / score-test equivalence at low SNR", true, {}};
  ScenarioSpec spec = reference_scenario(DetectorKind::T3Rao, options.seed);
  spec.snr_override_db = -15.0;
  const ResolvedScenario rs = resolve_scenario(spec);
  const int m = rs.spec.config.antennas;
  const int l = rs.spec.config.samples;
  const Matrix chol = Eigen::LLT<Matrix>(rs.noise_cov).matrixL();

  const long n = options.trials_equiv;
  const auto count = static_cast<std::size_t>(n);
  std::vector<double> glrt(count), rao(count);
  std::vector<double> rao_h0, rao_h1, glrt_h0, glrt_h1;
  parallel_for_index(n, [&](long t) {
    RngStream stream = RngStream::substream(options.seed, 0x70000 + t);
    Matrix x(m, l);
    for (int c = 0; c < l; ++c) {
      for (int r = 0; r < m; ++r) x(r, c) = stream.complex_normal();
    }
    x = chol * x;
    if (t % 2 == 1) x.colwise() += rs.signal.mean_vector;
    glrt[std::size_t(t)] = t3_glrt_log(x);
    rao[std::size_t(t)] = t3_rao(x);
  });
  for (long t = 0; t < n; ++t) {
    if (t % 2 == 1) {
      glrt_h1.push_back(glrt[std::size_t(t)]);
      rao_h1.push_back(rao[std::size_t(t)]);
    } else {
      glrt_h0.push_back(glrt[std::size_t(t)]);
      rao_h0.push_back(rao[std::size_t(t)]);
    }
  }

  const double rank_corr = spearman(glrt, rao);
  const double auc_glrt = roc_area(glrt_h0, glrt_h1);
  const double auc_rao = roc_area(rao_h0, rao_h1);
  const bool rank_ok = rank_corr >= 0.95;
  const bool auc_ok = std::abs(auc_glrt - auc_rao) <= 0.01;
  res.lines.push_back("  Spearman rank correlation " + fmt(rank_corr, 6) +
                      " (gate 0.95) " + pass_str(rank_ok));
  res.lines.push_back("  ROC areas glrt/rao " + fmt(auc_glrt, 5) + "/" +
                      fmt(auc_rao, 5) + " (gate diff 0.01) " + pass_str(auc_ok));
  res.pass = rank_ok && auc_ok;
  return res;
}

// -------------------------------------------------------------------------
// 8. Parameter sweeps.

struct AxisCheck {
  bool monotone = true;
  std::vector<double> step_gains;
  std::optional<double> endpoint_gain;
};

// Standard deviation of a pd estimate at an empirically calibrated
// threshold: binomial part plus the calibration noise propagated through
// a Gaussian quantile map (the dominant term near small target pfa).
double pd_sigma(double pd, double pfa, long trials) {
  const double n = double(trials);
  const double binom = pd * (1.0 - pd) / n;
  const double z_pd = inv_q(std::clamp(pd, 1e-12, 1.0 - 1e-12));
  const double z_fa = inv_q(std::clamp(pfa, 1e-12, 1.0 - 1e-12));
  const double density_ratio =
      std::exp(-0.5 * z_pd * z_pd + 0.5 * z_fa * z_fa);
  const double thresh = density_ratio * density_ratio * pfa * (1.0 - pfa) / n;
  return std::sqrt(binom + thresh);
}

AxisCheck run_axis(const ScenarioSpec& base, const std::string& axis,
                   const std::vector<double>& values,
                   const std::vector<double>& snr_grid, double target_pfa,
                   long trials, std::uint64_t seed, CriterionResult& res) {
  const SweepOutput out =
      sweep(base, axis, values, snr_grid, target_pfa, trials, seed);
  AxisCheck check;
  for (std::size_t v = 0; v + 1 < out.pd_vs_snr.size(); ++v) {
    for (std::size_t i = 0; i < snr_grid.size(); ++i) {
      const auto& lo = out.pd_vs_snr[v].points[i].point;
      const auto& hi = out.pd_vs_snr[v + 1].points[i].point;
      const double slack =
          3.0 * std::hypot(pd_sigma(lo.pd, target_pfa, trials),
                           pd_sigma(hi.pd, target_pfa, trials));
      if (hi.pd < lo.pd - slack) check.monotone = false;
    }
  }
  for (const auto& shift : out.step_shifts) {
    check.step_gains.push_back(shift.snr_shift_db.value_or(
        std::numeric_limits<double>::quiet_NaN()));
  }
  check.endpoint_gain = out.endpoint_shift.snr_shift_db;
  std::string gains = "steps:";
  for (double g : check.step_gains) gains += " " + fmt(g, 3);
  res.lines.push_back("  axis " + axis + " " + gains + " endpoint " +
                      (check.endpoint_gain ? fmt(*check.endpoint_gain, 3)
                                           : std::string("n/a")) +
                      " dB; monotone(joint CI) " + pass_str(check.monotone));
  return check;
}

CriterionResult criterion8(const AcceptanceOptions& options) {
  CriterionResult res{8, "sweep reproductions (M, L, K)", true, {}};
  // Fixed channel per scenario: with the SNR-targeted noise scaling the
  // informed detector's curve depends on the dimensions only, which is
  // the regime where the array/sample gains are well defined.
  ScenarioSpec base = reference_scenario(DetectorKind::Opt, options.seed);
  base.snr_override_db.reset();

  const std::vector<double> snr_grid{-16, -14, -12, -10, -8, -6, -4, -2};
  const double pfa = options.sweep_target_pfa;
  const long trials = options.trials_sweep;

  const AxisCheck m_check = run_axis(base, "M", {2, 4, 8}, snr_grid, pfa,
                                     trials, options.seed, res);
  const bool m_ok = m_check.endpoint_gain.has_value() &&
                    std::abs(*m_check.endpoint_gain - 5.48) <= 1.0;
  res.lines.push_back("    M 2->8 shift vs 5.48 dB (tol 1): " + pass_str(m_ok));

  const AxisCheck l_check = run_axis(base, "L", {8, 32}, snr_grid, pfa, trials,
                                     options.seed, res);
  const bool l_ok = l_check.endpoint_gain.has_value() &&
                    std::abs(*l_check.endpoint_gain - 6.0) <= 1.0;
  res.lines.push_back("    L 8->32 shift vs 6 dB (tol 1): " + pass_str(l_ok));

  const AxisCheck k_check = run_axis(base, "K", {4, 8, 12}, snr_grid, pfa,
                                     trials, options.seed, res);
  const bool k_mag_ok = k_check.endpoint_gain.has_value() &&
                        std::abs(*k_check.endpoint_gain - 1.74) <= 1.0;
  // 0.3 dB Monte Carlo allowance on the step comparison.
  const bool k_dim_ok = k_check.step_gains.size() == 2 &&
                        std::isfinite(k_check.step_gains[0]) &&
                        std::isfinite(k_check.step_gains[1]) &&
                        k_check.step_gains[0] + 0.3 >= k_check.step_gains[1];
  res.lines.push_back("    K 4->12 shift vs 1.74 dB (tol 1): " + pass_str(k_mag_ok));
  res.lines.push_back("    K diminishing increments (4->8 >= 8->12 - 0.3): " +
                      pass_str(k_dim_ok));

  res.pass = m_ok && l_ok && k_mag_ok && k_dim_ok && m_check.monotone &&
             l_check.monotone && k_check.monotone;
  return res;
}

// -------------------------------------------------------------------------
// 9. Structural invariants.

CriterionResult criterion9(const AcceptanceOptions& options) {
  CriterionResult res{9, "structural invariants and dominance", true, {}};

  bool bound_ok = true;
  bool glrt_sign_ok = true;
  {
    RngStream s(options.seed ^ 0x9999);
    const long n = options.trials_pinned;
    for (long t = 0; t < n; ++t) {
      const int m = 1 + int(s.uniform() * 3.0);
      const int l = m + 1 + int(s.uniform() * 10.0);
      Matrix x(m, l);
      for (int c = 0; c < l; ++c) {
        for (int r = 0; r < m; ++r) x(r, c) = s.complex_normal();
      }
      const double rao = t3_rao(x);
      if (!(rao >= 0.0 && rao <= 2.0 * l + 1e-9)) bound_ok = false;
      if (t % 16 == 0) {
        const double glrt = t3_glrt_log(x);
        if (!(glrt >= 0.0)) glrt_sign_ok = false;
      }
    }
    // Exact zero iff the column sum vanishes.
    Matrix half(2, 3);
    for (int c = 0; c < 3; ++c) {
      for (int r = 0; r < 2; ++r) half(r, c) = s.complex_normal();
    }
    Matrix zero_sum(2, 6);
    for (int c = 0; c < 3; ++c) {
      zero_sum.col(2 * c) = half.col(c);
      zero_sum.col(2 * c + 1) = -half.col(c);
    }
    if (t3_glrt_log(zero_sum) != 0.0) glrt_sign_ok = false;
    Matrix offset = zero_sum;
    offset.col(0) *= 2.0;
    if (!(t3_glrt_log(offset) > 0.0)) glrt_sign_ok = false;
  }
  res.lines.push_back("  t3_rao within [0, 2L] on " +
                      std::to_string(options.trials_pinned) +
                      " random inputs: " + pass_str(bound_ok));
  res.lines.push_back("  t3_glrt_log >= 0, zero iff zero column sum: " +
                      pass_str(glrt_sign_ok));

  // Neyman-Pearson dominance of the fully informed detector.
  const std::vector<double> grid{0.01, 0.05, 0.1, 0.2, 0.5, 0.9};
  const long trials = options.trials_structural;
  const ResolvedScenario opt =
      resolve_scenario(reference_scenario(DetectorKind::Opt, options.seed));
  const PerformanceCurve opt_curve = roc_curve(opt, grid, trials, options.seed);
  bool dominance = true;
  for (DetectorKind kind :
       {DetectorKind::T1, DetectorKind::T1LowSnr, DetectorKind::T1LargeL,
        DetectorKind::T2, DetectorKind::T3Glrt, DetectorKind::T3Rao}) {
    const ResolvedScenario other =
        resolve_scenario(reference_scenario(kind, options.seed));
    const PerformanceCurve curve = roc_curve(other, grid, trials, options.seed);
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (curve.points[i].point.pd_lo > opt_curve.points[i].point.pd_hi) {
        ok = false;
      }
    }
    res.lines.push_back(std::string("  opt ROC dominates ") +
                        detector_name(kind) + " (joint CI): " + pass_str(ok));
    dominance = dominance && ok;
  }
  res.pass = bound_ok && glrt_sign_ok && dominance;
  return res;
}

// -------------------------------------------------------------------------
// 10. Determinism of the validate outputs.

AcceptanceOptions nested_options(const AcceptanceOptions& options) {
  AcceptanceOptions nested = options;
  nested.trials_pinned = 1500;
  nested.trials_equiv = 1500;
  nested.trials_sweep = 1500;
  nested.trials_structural = 1500;
  nested.sweep_target_pfa = 0.1;  // keeps the calibration floor reachable
  nested.include_determinism = false;
  return nested;
}

CriterionResult criterion10(const AcceptanceOptions& options) {
  CriterionResult res{10, "validate outputs are byte-identical across reruns", true, {}};
  const AcceptanceOptions nested = nested_options(options);

  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("irsdetect-determinism-" +
                                   std::to_string(::getpid()));
  auto run_once = [&] {
    const auto results = run_acceptance(nested);
    write_validate_outputs(dir.string(), results, "(embedded)", "{}",
                           nested.seed, nested.trials_pinned);
  };
  auto snapshot = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  run_once();
  const std::string report_a = snapshot("validate_report.txt");
  const std::string manifest_a = snapshot("manifest.json");
  run_once();
  const bool report_same =
      !report_a.empty() && report_a == snapshot("validate_report.txt");
  const bool manifest_same =
      !manifest_a.empty() && manifest_a == snapshot("manifest.json");
  res.lines.push_back(std::string("  validate_report.txt: ") +
                      (report_same ? "identical" : "DIFFER"));
  res.lines.push_back(std::string("  manifest.json: ") +
                      (manifest_same ? "identical" : "DIFFER"));
  fs::remove_all(dir);
  res.pass = report_same && manifest_same;
  res.lines.push_back(
      "  (nested validate = criteria 1-9 at reduced trials, run twice)");
  return res;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  switch (id) {
    case 1: return criterion1(options);
    case 2: return criterion2(options);
    case 3: return criterion3(options);
    case 4: return criterion4(options);
    case 5: return criterion5(options);
    case 6: return criterion6(options);
    case 7: return criterion7(options);
    case 8: return criterion8(options);
    case 9: return criterion9(options);
    case 10: return criterion10(options);
    default: throw DomainError("run_criterion: id must be 1..10");
  }
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> results;
  const int last = options.include_determinism ? 10 : 9;
  for (int id = 1; id <= last; ++id) {
    results.push_back(run_criterion(id, options));
  }
  return results;
}

std::string render_report(const std::vector<CriterionResult>& results) {
  std::ostringstream out;
  int passed = 0;
  for (const auto& res : results) {
    out << (res.pass ? "PASS" : "FAIL") << " criterion " << res.id << ": "
        << res.name << '\n';
    for (const auto& line : res.lines) out << "    " << line << '\n';
    passed += res.pass;
  }
  out << passed << "/" << results.size() << " criteria passed\n";
  return out.str();
}

void write_validate_outputs(const std::string& out_dir,
                            const std::vector<CriterionResult>& results,
                            const std::string& config_path,
                            const std::string& config_echo, std::uint64_t seed,
                            long trials) {
  RunManifest manifest("validate", config_path, config_echo, seed, trials);
  manifest.write_file(out_dir, "validate_report.txt", render_report(results));
  manifest.finalize(out_dir);
}

}  // namespace irsdetect::validation
