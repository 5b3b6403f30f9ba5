#include "uplink/report.hpp"

#include "uplink/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace uplink {

using nlohmann::json;

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

json params_json(const CalibratedParameters& p) {
  return {{"mode_overlap", p.mode_overlap},
          {"double_pair_fraction", p.double_pair_fraction},
          {"delta_polarization_rad", p.delta_polarization_rad},
          {"background_rate_hz", p.background_rate_hz},
          {"receiver_efficiency", p.receiver_efficiency},
          {"zenith_transmittance", p.zenith_transmittance},
          {"system_efficiency_db", p.system_efficiency_db},
          {"slew_degradation_k", p.slew_degradation_k}};
}

}  // namespace

json to_json(const CampaignResult& r) {
  json orbits = json::array();
  for (const OrbitRecord& o : r.orbits) {
    orbits.push_back({{"index", o.index},
                      {"date", o.date},
                      {"max_elevation_deg", o.max_elevation_deg},
                      {"state", std::string(to_string(o.state))},
                      {"counts",
                       {{"phi_plus", {o.counts[0][0], o.counts[0][1]}},
                        {"phi_minus", {o.counts[1][0], o.counts[1][1]}}}},
                      {"correct", o.correct},
                      {"wrong", o.wrong},
                      {"signal_events", o.signal_events},
                      {"accidental_events", o.accidental_events},
                      {"tracked_s", o.tracked_s}});
  }
  json states = json::array();
  for (const StateResult& s : r.states) {
    json entry = {{"state", std::string(to_string(s.state))}, {"correct", s.correct}, {"wrong", s.wrong}};
    if (s.estimate) {
      entry["fidelity"] = s.estimate->fidelity;
      entry["sigma"] = s.estimate->sigma;
    } else {
      entry["fidelity"] = nullptr;
      entry["sigma"] = nullptr;
    }
    states.push_back(entry);
  }
  return {{"schema_version", kSchemaVersion},
          {"total_counts", r.total_counts},
          {"mean_fidelity", r.mean_fidelity},
          {"mean_sigma", r.mean_sigma},
          {"states", states},
          {"orbits", orbits}};
}

json to_json(const CalibrationReport& r) {
  json anchors = json::array();
  for (double v : r.achieved.anchor_loss_db) anchors.push_back(v);
  json deficits = json::object();
  for (std::size_t k = 0; k < kNoiseSources.size(); ++k) {
    deficits[std::string(to_string(kNoiseSources[k]))] = r.achieved.deficits[k];
  }
  return {{"schema_version", kSchemaVersion},
          {"parameters", params_json(r.params)},
          {"achieved", {{"deficits", deficits}, {"anchor_loss_db", anchors}, {"total_counts", r.achieved.total_counts}}},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

void write_fidelity_csv(std::ostream& out, const CampaignResult& result) {
  out << "state,F,sigma\n";
  for (const StateResult& s : result.states) {
    out << to_string(s.state) << ',';
    if (s.estimate) {
      out << fmt("%.6f", s.estimate->fidelity) << ',' << fmt("%.6f", s.estimate->sigma) << '\n';
    } else {
      out << "nan,nan\n";
    }
  }
}

void write_error_budget_csv(std::ostream& out, const ErrorBudget& budget) {
  out << "source,deficit\n";
  for (std::size_t k = 0; k < kNoiseSources.size(); ++k) {
    out << to_string(kNoiseSources[k]) << ',' << fmt("%.6f", budget.deficit[k]) << '\n';
  }
  out << "all_on," << fmt("%.6f", budget.all_on) << '\n';
  out << "baseline," << fmt("%.6f", budget.baseline) << '\n';
}

std::vector<LossSample> reference_loss_profile(const CampaignConfig& config) {
  return loss_profile(config.geometry, config.link, config.orbit_duration_s, 1.0);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_campaign_outputs(const std::filesystem::path& dir, const CampaignConfig& config,
                            const CampaignResult& result, const ErrorBudget& budget) {
  write_text_file(dir / "campaign_result.json", to_json(result).dump(2) + "\n");

  std::ostringstream fid;
  write_fidelity_csv(fid, result);
  write_text_file(dir / "fig3_fidelities.csv", fid.str());

  std::ostringstream loss;
  const auto rows = reference_loss_profile(config);
  write_loss_csv(loss, rows);
  write_text_file(dir / "fig2_loss.csv", loss.str());

  std::ostringstream eb;
  write_error_budget_csv(eb, budget);
  write_text_file(dir / "error_budget.csv", eb.str());
}

}  // namespace uplink
