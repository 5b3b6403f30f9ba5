#include "uplink/cli.hpp"

#include "uplink/calibrate.hpp"
#include "uplink/config.hpp"
#include "uplink/experiment.hpp"
#include "uplink/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace uplink {

namespace {

struct Options {
  std::string config;
  std::string out;  // empty: current directory, or stdout only for error-budget
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  std::size_t samples = 100000;
  std::optional<double> rate_hz;
  double distance_km = 1200.0;
  double loss_db_per_km = 0.2;

  std::filesystem::path out_dir() const { return out.empty() ? std::filesystem::path(".") : std::filesystem::path(out); }
};

std::string line(const char* format, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

CampaignConfig load_with_seed(const Options& o) {
  CampaignConfig c = load_campaign_config(o.config);
  if (o.seed) c.seed = *o.seed;
  return c;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const CampaignConfig c = load_with_seed(o);
  const CampaignResult result = run_campaign(c);
  const ErrorBudget budget = error_budget(c);
  write_campaign_outputs(o.out_dir(), c, result, budget);
  if (o.verbose) {
    for (const OrbitRecord& r : result.orbits) {
      err << "orbit " << r.index + 1 << " max " << line("%.2f", r.max_elevation_deg) << " deg, state "
          << to_string(r.state) << ": " << r.correct << " correct, " << r.wrong << " wrong\n";
    }
  }
  out << "total fourfold counts: " << result.total_counts << '\n';
  char buf[128];
  std::snprintf(buf, sizeof buf, "mean fidelity: %.4f +- %.4f\n", result.mean_fidelity, result.mean_sigma);
  out << buf;
  for (const StateResult& s : result.states) {
    if (!s.estimate) {
      out << "  " << to_string(s.state) << ": no counts\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "  %-2s F = %.4f +- %.4f (%llu)\n", std::string(to_string(s.state)).c_str(),
                  s.estimate->fidelity, s.estimate->sigma, static_cast<unsigned long long>(s.correct + s.wrong));
    out << buf;
  }
  return kExitOk;
}

int cmd_loss_profile(const Options& o, std::ostream& out, std::ostream&) {
  const CampaignConfig c = load_with_seed(o);
  const auto rows = reference_loss_profile(c);
  std::ostringstream csv;
  write_loss_csv(csv, rows);
  write_text_file(o.out_dir() / "fig2_loss.csv", csv.str());
  out << rows.size() << " rows written\n";
  return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  const TargetsFile file = load_targets(o.config);
  CalibrationReport report;
  int code = kExitOk;
  try {
    report = calibrate(file.base, file.targets);
  } catch (const CalibrationError& e) {
    err << "calibration did not converge: " << e.what() << '\n';
    report = e.best();
    code = kExitNonConvergence;
  }
  CampaignConfig fitted = file.base;
  apply_parameters(fitted, report.params);
  const std::filesystem::path dir = o.out_dir();
  write_text_file(dir / "calibration.json", to_json(report).dump(2) + "\n");
  write_text_file(dir / "calibrated_config.json", to_json(fitted).dump(2) + "\n");

  const Observables& a = report.achieved;
  char buf[160];
  for (std::size_t k = 0; k < kNoiseSources.size(); ++k) {
    std::snprintf(buf, sizeof buf, "deficit %-24s target %.6f achieved %.6f\n",
                  std::string(to_string(kNoiseSources[k])).c_str(), file.targets.deficits[k], a.deficits[k]);
    out << buf;
  }
  for (std::size_t i = 0; i < file.targets.loss_anchors.size(); ++i) {
    const LossAnchor& t = file.targets.loss_anchors[i];
    std::snprintf(buf, sizeof buf, "loss at %6.2f deg        target %.4f achieved %.4f dB\n", t.elevation_deg,
                  t.loss_db, a.anchor_loss_db[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "total counts                     target %.2f achieved %.2f\n",
                file.targets.total_counts, a.total_counts);
  out << buf;
  std::snprintf(buf, sizeof buf, "residual %.3e after %d sweeps\n", report.residual, report.iterations);
  out << buf;
  return code;
}

int cmd_error_budget(const Options& o, std::ostream& out, std::ostream&) {
  const CampaignConfig c = load_with_seed(o);
  const ErrorBudget budget = error_budget(c);
  std::ostringstream csv;
  write_error_budget_csv(csv, budget);
  out << csv.str();
  if (!o.out.empty()) write_text_file(o.out_dir() / "error_budget.csv", csv.str());
  return kExitOk;
}

int cmd_classical_baseline(const Options& o, std::ostream& out, std::ostream&) {
  if (o.samples == 0) throw ConfigError("--samples must be positive");
  std::seed_seq seq{static_cast<std::uint32_t>(o.seed.value_or(0)), static_cast<std::uint32_t>(o.seed.value_or(0) >> 32)};
  Rng rng(seq);
  out << line("classical measure-and-resend fidelity: %.6f\n", classical_baseline(o.samples, rng));
  return kExitOk;
}

int cmd_fibre_compare(const Options& o, std::ostream& out, std::ostream&) {
  double rate = 0.0;
  if (o.rate_hz) {
    rate = *o.rate_hz;
  } else if (!o.config.empty()) {
    rate = load_campaign_config(o.config).source.fourfold_ground_rate_hz();
  } else {
    rate = SourceModel{}.fourfold_ground_rate_hz();
  }
  FibreComparison f;
  try {
    f = fibre_comparison(rate, o.distance_km, o.loss_db_per_km);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "fourfold rate %.1f Hz over %.1f km at %.3f dB/km: loss %.1f dB, transmittance %.3e\n"
                "expected wait for one event: %.3e s (%.3e years)\n",
                rate, o.distance_km, o.loss_db_per_km, f.loss_db, f.transmittance, f.waiting_s, f.waiting_years);
  out << buf;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ground-to-satellite teleportation campaign simulator", "uplink-sim"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", o.config, "campaign configuration (targets file for calibrate)");
    if (config_required) opt->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed override (unsigned 64-bit)");
    sub->add_flag("--verbose", o.verbose, "per-orbit diagnostics on stderr");
  };

  auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo campaign and write all outputs");
  add_common(simulate, true);
  auto* loss = app.add_subcommand("loss-profile", "write the reference-pass loss profile");
  add_common(loss, true);
  auto* calib = app.add_subcommand("calibrate", "fit model parameters to a targets file");
  add_common(calib, true);
  auto* budget = app.add_subcommand("error-budget", "one-source-at-a-time fidelity deficits");
  add_common(budget, true);
  auto* baseline = app.add_subcommand("classical-baseline", "measure-and-resend fidelity over random inputs");
  add_common(baseline, false);
  baseline->add_option("--samples", o.samples, "number of Monte Carlo samples");
  auto* fibre = app.add_subcommand("fibre-compare", "waiting time for the same teleportation over fibre");
  add_common(fibre, false);
  fibre->add_option("--rate", o.rate_hz, "fourfold rate in Hz (default: source model)");
  fibre->add_option("--distance", o.distance_km, "fibre length in km");
  fibre->add_option("--loss-per-km", o.loss_db_per_km, "fibre attenuation in dB/km");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(o, out, err);
    if (*loss) return cmd_loss_profile(o, out, err);
    if (*calib) return cmd_calibrate(o, out, err);
    if (*budget) return cmd_error_budget(o, out, err);
    if (*baseline) return cmd_classical_baseline(o, out, err);
    if (*fibre) return cmd_fibre_compare(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace uplink
