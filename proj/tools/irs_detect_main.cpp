#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "irsdetect/analytic.hpp"
#include "irsdetect/config.hpp"
#include "irsdetect/report.hpp"

namespace {

using namespace irsdetect;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::optional<long> trials_override;
};

RunConfig load(const CommonArgs& args) {
  RunConfig config = load_config_file(args.config_path);
  if (args.seed_override) config.scenario.config.base_seed = *args.seed_override;
  if (args.trials_override) config.trials = *args.trials_override;
  return config;
}

std::vector<double> default_pfa_grid() {
  return {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
}

CurveRow analytic_row(const std::string& axis, double pfa, double threshold,
                      double pd, std::uint64_t seed) {
  CurveRow row;
  row.axis_name = axis;
  row.axis_value = pfa;
  row.threshold = threshold;
  row.pfa = row.pfa_lo = row.pfa_hi = pfa;
  row.pd = row.pd_lo = row.pd_hi = pd;
  row.trials = 0;
  row.seed = seed;
  return row;
}

int run_analytic(const CommonArgs& args) {
  const RunConfig config = load(args);
  const ResolvedScenario rs = resolve_scenario(config.scenario);
  const int m = rs.spec.config.antennas;
  const int l = rs.spec.config.samples;
  const std::uint64_t seed = rs.spec.config.base_seed;
  const std::vector<double> grid =
      config.pfa_grid.empty() ? default_pfa_grid() : config.pfa_grid;

  std::vector<CurveRow> rows;
  const Matrix tmpl = template_matrix(rs.signal, l);
  switch (rs.spec.detector) {
    case DetectorKind::Opt: {
      const Complex b = opt_b(tmpl, rs.noise_cov);
      for (double pfa : grid) {
        const double tau = opt_threshold(pfa, b);
        rows.push_back(analytic_row("pfa", pfa, tau, opt_perf(tau, b).pd, seed));
      }
      break;
    }
    case DetectorKind::T1: {
      const double trace_mm = tmpl.squaredNorm();
      const double sigma2 = rs.noise_cov.trace().real() / m;
      for (double pfa : grid) {
        const double tau = t1_threshold(pfa, trace_mm, sigma2, l, m);
        rows.push_back(analytic_row(
            "pfa", pfa, tau, t1_perf(tau, trace_mm, sigma2, l, m).pd, seed));
      }
      break;
    }
    case DetectorKind::T2: {
      for (double pfa : grid) {
        const double tau = t2_threshold(pfa, l, m);
        const T2Perf perf =
            t2_perf_from_cov(tau, rs.noise_cov, rs.signal.mean_vector, l);
        rows.push_back(analytic_row("pfa", pfa, tau, perf.pd, seed));
      }
      break;
    }
    case DetectorKind::T3Rao: {
      const Matrix gain =
          rs.channel.composite *
          rs.powers_mw.cwiseSqrt().cast<Complex>().asDiagonal();
      const double lambda =
          lambda_rao_from_model(gain, rs.signal.signal, rs.noise_cov, l);
      for (double pfa : grid) {
        const double tau = rao_threshold_exact(pfa, l, m);
        rows.push_back(analytic_row(
            "pfa", pfa, tau, rao_asymptotic(tau, lambda, m).pd, seed));
      }
      break;
    }
    default:
      throw ConfigError(
          "analytic: closed forms are available for detectors opt, t1, t2 "
          "and t3_rao");
  }

  RunManifest manifest("analytic", args.config_path,
                       serialize_config(config), seed, 0);
  manifest.write_file(args.out_dir, "analytic_curves.csv", curve_csv(rows));
  manifest.finalize(args.out_dir);
  return 0;
}

int run_simulate(const CommonArgs& args) {
  const RunConfig config = load(args);
  const ResolvedScenario rs = resolve_scenario(config.scenario);
  const std::uint64_t seed = rs.spec.config.base_seed;
  const int m = rs.spec.config.antennas;
  const int l = rs.spec.config.samples;

  const double empirical_tau =
      calibrate_threshold(rs, config.target_pfa, config.trials, seed);
  std::vector<CurveRow> rows;
  {
    const OperatingPoint op =
        estimate_operating_point(rs, empirical_tau, config.trials, seed);
    auto all = rows_from_curve(
        PerformanceCurve{"empirical_threshold", {{config.target_pfa, op}}}, seed);
    rows.insert(rows.end(), all.begin(), all.end());
  }
  // When a closed-form threshold exists, report it side by side.
  std::optional<double> analytic_tau;
  switch (rs.spec.detector) {
    case DetectorKind::Opt:
      analytic_tau = opt_threshold(
          config.target_pfa, opt_b(template_matrix(rs.signal, l), rs.noise_cov));
      break;
    case DetectorKind::T2:
      analytic_tau = t2_threshold(config.target_pfa, l, m);
      break;
    case DetectorKind::T3Rao:
      analytic_tau = rao_threshold_exact(config.target_pfa, l, m);
      break;
    default:
      break;
  }
  if (analytic_tau) {
    const OperatingPoint op =
        estimate_operating_point(rs, *analytic_tau, config.trials, seed);
    auto all = rows_from_curve(
        PerformanceCurve{"analytic_threshold", {{config.target_pfa, op}}}, seed);
    rows.insert(rows.end(), all.begin(), all.end());
  }

  RunManifest manifest("simulate", args.config_path,
                       serialize_config(config), seed, config.trials);
  manifest.write_file(args.out_dir, "operating_points.csv", curve_csv(rows));
  manifest.finalize(args.out_dir);
  return 0;
}

int run_roc(const CommonArgs& args) {
  const RunConfig config = load(args);
  const ResolvedScenario rs = resolve_scenario(config.scenario);
  const std::uint64_t seed = rs.spec.config.base_seed;
  const std::vector<double> grid =
      config.pfa_grid.empty() ? default_pfa_grid() : config.pfa_grid;
  const PerformanceCurve curve = roc_curve(rs, grid, config.trials, seed);

  RunManifest manifest("roc", args.config_path,
                       serialize_config(config), seed, config.trials);
  manifest.write_file(args.out_dir, "roc.csv",
                      curve_csv(rows_from_curve(curve, seed)));
  manifest.finalize(args.out_dir);
  return 0;
}

int run_sweep(const CommonArgs& args) {
  const RunConfig config = load(args);
  if (config.sweep_values.empty()) {
    throw ConfigError("sweep: sweep_values must be provided");
  }
  const std::uint64_t seed = config.scenario.config.base_seed;
  const SweepOutput out =
      sweep(config.scenario, config.sweep_axis, config.sweep_values,
            config.snr_grid_db, config.target_pfa, config.trials, seed);

  std::vector<CurveRow> rows;
  for (std::size_t v = 0; v < out.pd_vs_snr.size(); ++v) {
    const std::string axis =
        out.axis_name + "=" + format_double(out.axis_values[v]);
    for (const auto& point : out.pd_vs_snr[v].points) {
      CurveRow row;
      row.axis_name = axis;
      row.axis_value = point.axis_value;
      row.threshold = point.point.threshold;
      row.pfa = point.point.pfa;
      row.pfa_lo = point.point.pfa_lo;
      row.pfa_hi = point.point.pfa_hi;
      row.pd = point.point.pd;
      row.pd_lo = point.point.pd_lo;
      row.pd_hi = point.point.pd_hi;
      row.trials = point.point.trials;
      row.seed = seed;
      rows.push_back(row);
    }
  }

  std::ostringstream shifts;
  shifts << "schema_version,axis,from,to,snr_shift_db,note\n";
  auto shift_row = [&](const SweepShift& s) {
    shifts << kCsvSchemaVersion << ',' << out.axis_name << ','
           << format_double(s.from_value) << ',' << format_double(s.to_value)
           << ','
           << (s.snr_shift_db ? format_double(*s.snr_shift_db) : std::string())
           << ',' << s.note << '\n';
  };
  for (const auto& s : out.step_shifts) shift_row(s);
  if (out.axis_values.size() > 2) shift_row(out.endpoint_shift);

  RunManifest manifest("sweep", args.config_path,
                       serialize_config(config), seed, config.trials);
  manifest.write_file(args.out_dir, "sweep_curves.csv", curve_csv(rows));
  manifest.write_file(args.out_dir, "sweep_shifts.csv", shifts.str());
  manifest.finalize(args.out_dir);
  return 0;
}

int run_validate(const CommonArgs& args) {
  const RunConfig config = load(args);
  validation::AcceptanceOptions options;
  options.seed = config.scenario.config.base_seed;
  if (args.trials_override) {
    options.trials_pinned = *args.trials_override;
    options.trials_equiv = std::min<long>(*args.trials_override, 10000);
    options.trials_sweep = std::min<long>(*args.trials_override, 20000);
    options.trials_structural = std::min<long>(*args.trials_override, 30000);
    if (options.trials_sweep < 1.0 / 0.01 * 100.0) {
      options.sweep_target_pfa = 0.1;
    }
  }
  const auto results = validation::run_acceptance(options);
  validation::write_validate_outputs(args.out_dir, results, args.config_path,
                                     serialize_config(config), options.seed,
                                     options.trials_pinned);
  std::cout << validation::render_report(results);
  for (const auto& res : results) {
    if (!res.pass) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted IoT activity detection simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "scenario configuration (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed_override, "override the base seed");
    cmd->add_option("--trials", args.trials_override, "override the trial count");
  };

  CLI::App* analytic = app.add_subcommand("analytic", "closed-form curves");
  CLI::App* simulate = app.add_subcommand("simulate", "operating point at a target pfa");
  CLI::App* roc = app.add_subcommand("roc", "empirical ROC curve");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "parameter sweep");
  CLI::App* validate = app.add_subcommand("validate", "run the acceptance checks");
  for (CLI::App* cmd : {analytic, simulate, roc, sweep_cmd, validate}) {
    add_common(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (analytic->parsed()) return run_analytic(args);
    if (simulate->parsed()) return run_simulate(args);
    if (roc->parsed()) return run_roc(args);
    if (sweep_cmd->parsed()) return run_sweep(args);
    if (validate->parsed()) return run_validate(args);
  } catch (const irsdetect::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const irsdetect::DomainError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const irsdetect::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
