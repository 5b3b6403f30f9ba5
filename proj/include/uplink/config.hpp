#pragma once

// Versioned JSON campaign configuration and calibration-target files.
// Unknown keys are rejected; errors name the offending field by JSON pointer,
// syntax errors carry the line and column.

#include "uplink/calibrate.hpp"
#include "uplink/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string_view>

namespace uplink {

inline constexpr int kSchemaVersion = 1;

/// Malformed or missing configuration input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output could not be written (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CampaignConfig parse_campaign_config(const nlohmann::json& doc);
CampaignConfig parse_campaign_config(std::string_view text);
CampaignConfig load_campaign_config(const std::filesystem::path& path);

/// Fully materialized config (explicit orbits and schedule); parses back to
/// an equal campaign.
nlohmann::json to_json(const CampaignConfig& config);

struct TargetsFile {
  CampaignConfig base;  // loaded from `base_config`, relative to the targets file
  CalibrationTargets targets;
};

TargetsFile load_targets(const std::filesystem::path& path);

/// Draws `count` orbit maxima uniformly in [lo, hi] from a stream derived from `seed`.
std::vector<OrbitSpec> draw_orbits(std::uint64_t seed, std::size_t count, double lo_deg, double hi_deg);

}  // namespace uplink
