#pragma once

// Result files: campaign_result.json, fig3_fidelities.csv, fig2_loss.csv and
// error_budget.csv.

#include "uplink/calibrate.hpp"
#include "uplink/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>

namespace uplink {

nlohmann::json to_json(const CampaignResult& result);
nlohmann::json to_json(const CalibrationReport& report);

/// Columns state,F,sigma.
void write_fidelity_csv(std::ostream& out, const CampaignResult& result);
/// Columns source,deficit; rows for the four sources, all_on and baseline.
void write_error_budget_csv(std::ostream& out, const ErrorBudget& budget);

/// Loss profile of the reference pass over the collection window.
std::vector<LossSample> reference_loss_profile(const CampaignConfig& config);

/// Writes the four campaign output files into `dir`; throws IoError.
void write_campaign_outputs(const std::filesystem::path& dir, const CampaignConfig& config,
                            const CampaignResult& result, const ErrorBudget& budget);

/// Writes `text` to `path`, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace uplink
