#include "uplink/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace uplink {

using nlohmann::json;

namespace {

// Reads the members of one JSON object and remembers which keys were used so
// that leftovers can be rejected.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }

  template <typename T>
  void optional(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    read(key, out);
  }

  template <typename T>
  void required(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ConfigError("missing required field '" + field(key) + "'");
    read(key, out);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  std::string field(const char* key) const { return path_ + "/" + key; }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown field '" + path_ + "/" + key + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "document root" : "field '" + path_ + "'"; }

  void read(const char* key, double& out) {
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError("field '" + field(key) + "': expected a number");
    out = v.get<double>();
  }
  void read(const char* key, bool& out) {
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError("field '" + field(key) + "': expected true or false");
    out = v.get<bool>();
  }
  void read(const char* key, std::string& out) {
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError("field '" + field(key) + "': expected a string");
    out = v.get<std::string>();
  }
  void read(const char* key, std::uint64_t& out) {
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError("field '" + field(key) + "': expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void read(const char* key, std::int64_t& out) {
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError("field '" + field(key) + "': expected an integer");
    out = v.get<std::int64_t>();
  }
  void read(const char* key, int& out) {
    std::int64_t v = 0;
    read(key, v);
    out = static_cast<int>(v);
  }
  void read(const char* key, std::vector<double>& out) {
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError("field '" + field(key) + "': expected an array of numbers");
    out.clear();
    for (const json& x : v) {
      if (!x.is_number()) throw ConfigError("field '" + field(key) + "': expected an array of numbers");
      out.push_back(x.get<double>());
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

void parse_source(const json& j, SourceModel& s) {
  Fields f(j, "/source");
  f.optional("rep_rate_hz", s.rep_rate_hz);
  f.optional("trigger_rate_hz", s.trigger_rate_hz);
  f.optional("pair_rate_hz", s.pair_rate_hz);
  f.optional("entangled_fidelity", s.entangled_fidelity);
  f.optional("double_pair_fraction", s.double_pair_fraction);
  f.optional("module_fourfold_rates_hz", s.module_fourfold_rates_hz);
  f.finish();
}

void parse_geometry(const json& j, PassGeometry& g) {
  Fields f(j, "/geometry");
  f.optional("earth_radius_km", g.earth_radius_km);
  f.optional("orbit_altitude_km", g.orbit_altitude_km);
  f.optional("reference_max_elevation_deg", g.max_elevation_deg);
  f.optional("min_elevation_deg", g.min_elevation_deg);
  f.finish();
}

void parse_link(const json& j, LinkModel& m) {
  Fields f(j, "/link");
  f.optional("divergence_x_urad", m.divergence_x_urad);
  f.optional("divergence_y_urad", m.divergence_y_urad);
  f.optional("seeing_urad", m.seeing_urad);
  f.optional("tracking_error_urad", m.tracking_error_urad);
  f.optional("receiver_diameter_m", m.receiver_diameter_m);
  f.optional("zenith_transmittance", m.zenith_transmittance);
  f.optional("system_efficiency_db", m.system_efficiency_db);
  f.optional("slew_degradation_k", m.slew_degradation_k);
  f.optional("slew_reference_rate_deg_s", m.slew_reference_rate_deg_s);
  f.finish();
}

void parse_detection(const json& j, DetectionModel& d) {
  Fields f(j, "/detection");
  f.optional("receiver_efficiency", d.receiver_efficiency);
  f.optional("background_rate_hz", d.background_rate_hz);
  f.optional("window_ps", d.sync.window_ps);
  f.optional("detector_jitter_ps", d.sync.detector_jitter_ps);
  f.optional("sync_rate_hz", d.sync.sync_rate_hz);
  f.finish();
}

void parse_noise(const json& j, NoiseToggles& n) {
  Fields f(j, "/noise");
  f.optional("double_pair", n.double_pair);
  f.optional("distinguishability", n.distinguishability);
  f.optional("polarization_distortion", n.polarization_distortion);
  f.optional("background", n.background);
  f.finish();
}

std::vector<OrbitSpec> parse_orbits(const json& j) {
  if (!j.is_array()) throw ConfigError("field '/orbits': expected an array");
  std::vector<OrbitSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Fields f(j[i], "/orbits/" + std::to_string(i));
    OrbitSpec o;
    f.optional("date", o.date);
    f.required("max_elevation_deg", o.max_elevation_deg);
    f.finish();
    out.push_back(o);
  }
  return out;
}

std::vector<Mub> parse_schedule(const json& j, std::size_t orbits) {
  if (j.is_string()) {
    if (j.get<std::string>() != "round_robin") {
      throw ConfigError("field '/schedule': expected \"round_robin\" or a list of state labels");
    }
    return round_robin_schedule(orbits);
  }
  if (!j.is_array()) throw ConfigError("field '/schedule': expected \"round_robin\" or a list of state labels");
  std::vector<Mub> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto label = j[i].is_string() ? parse_mub(j[i].get<std::string>()) : std::nullopt;
    if (!label) throw ConfigError("field '/schedule/" + std::to_string(i) + "': expected one of H V + - R L");
    out.push_back(*label);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::vector<OrbitSpec> draw_orbits(std::uint64_t seed, std::size_t count, double lo_deg, double hi_deg) {
  if (!(lo_deg > 0 && lo_deg <= hi_deg && hi_deg <= 90)) {
    throw ConfigError("field '/orbit_draw': need 0 < min_deg <= max_deg <= 90");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x0eb1u};
  Rng rng(seq);
  std::uniform_real_distribution<double> u(lo_deg, hi_deg);
  std::vector<OrbitSpec> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].date = "orbit-" + std::to_string(i + 1);
    out[i].max_elevation_deg = u(rng);
  }
  return out;
}

CampaignConfig parse_campaign_config(const json& doc) {
  Fields f(doc, "");
  int version = 0;
  f.required("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("field '/schema_version': unsupported version " + std::to_string(version));
  }
  CampaignConfig c;
  f.required("seed", c.seed);
  f.required("orbit_duration", c.orbit_duration_s);
  f.optional("slice_s", c.slice_s);

  const json* orbits = f.child("orbits");
  const json* draw = f.child("orbit_draw");
  if (orbits && draw) throw ConfigError("fields '/orbits' and '/orbit_draw' are mutually exclusive");
  if (orbits) {
    c.orbits = parse_orbits(*orbits);
  } else if (draw) {
    Fields d(*draw, "/orbit_draw");
    std::int64_t count = 0;
    double lo = 20.0, hi = 76.0;
    d.required("count", count);
    d.optional("min_deg", lo);
    d.optional("max_deg", hi);
    d.finish();
    if (count < 1) throw ConfigError("field '/orbit_draw/count': must be positive");
    c.orbits = draw_orbits(c.seed, static_cast<std::size_t>(count), lo, hi);
  } else {
    throw ConfigError("missing required field '/orbits' (or '/orbit_draw')");
  }

  const json* schedule = f.child("schedule");
  c.schedule = schedule ? parse_schedule(*schedule, c.orbits.size()) : round_robin_schedule(c.orbits.size());

  if (const json* j = f.child("source")) parse_source(*j, c.source);
  if (const json* j = f.child("bsm")) {
    Fields b(*j, "/bsm");
    b.optional("mode_overlap", c.bsm.mode_overlap);
    b.finish();
  }
  if (const json* j = f.child("geometry")) parse_geometry(*j, c.geometry);
  if (const json* j = f.child("link")) parse_link(*j, c.link);
  if (const json* j = f.child("channel")) {
    Fields ch(*j, "/channel");
    ch.optional("delta_polarization_rad", c.channel.delta_polarization_rad);
    ch.optional("polarization_jitter_rad", c.channel.polarization_jitter_rad);
    ch.finish();
  }
  if (const json* j = f.child("detection")) parse_detection(*j, c.detection);
  if (const json* j = f.child("noise")) parse_noise(*j, c.noise);
  f.finish();

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

CampaignConfig parse_campaign_config(std::string_view text) { return parse_campaign_config(parse_text(text)); }

CampaignConfig load_campaign_config(const std::filesystem::path& path) {
  try {
    return parse_campaign_config(std::string_view(read_file(path)));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const CampaignConfig& c) {
  json orbits = json::array();
  for (const OrbitSpec& o : c.orbits) orbits.push_back({{"date", o.date}, {"max_elevation_deg", o.max_elevation_deg}});
  json schedule = json::array();
  for (Mub m : c.schedule) schedule.push_back(std::string(to_string(m)));
  return {
      {"schema_version", kSchemaVersion},
      {"seed", c.seed},
      {"orbit_duration", c.orbit_duration_s},
      {"slice_s", c.slice_s},
      {"orbits", orbits},
      {"schedule", schedule},
      {"source",
       {{"rep_rate_hz", c.source.rep_rate_hz},
        {"trigger_rate_hz", c.source.trigger_rate_hz},
        {"pair_rate_hz", c.source.pair_rate_hz},
        {"entangled_fidelity", c.source.entangled_fidelity},
        {"double_pair_fraction", c.source.double_pair_fraction},
        {"module_fourfold_rates_hz", c.source.module_fourfold_rates_hz}}},
      {"bsm", {{"mode_overlap", c.bsm.mode_overlap}}},
      {"geometry",
       {{"earth_radius_km", c.geometry.earth_radius_km},
        {"orbit_altitude_km", c.geometry.orbit_altitude_km},
        {"reference_max_elevation_deg", c.geometry.max_elevation_deg},
        {"min_elevation_deg", c.geometry.min_elevation_deg}}},
      {"link",
       {{"divergence_x_urad", c.link.divergence_x_urad},
        {"divergence_y_urad", c.link.divergence_y_urad},
        {"seeing_urad", c.link.seeing_urad},
        {"tracking_error_urad", c.link.tracking_error_urad},
        {"receiver_diameter_m", c.link.receiver_diameter_m},
        {"zenith_transmittance", c.link.zenith_transmittance},
        {"system_efficiency_db", c.link.system_efficiency_db},
        {"slew_degradation_k", c.link.slew_degradation_k},
        {"slew_reference_rate_deg_s", c.link.slew_reference_rate_deg_s}}},
      {"channel",
       {{"delta_polarization_rad", c.channel.delta_polarization_rad},
        {"polarization_jitter_rad", c.channel.polarization_jitter_rad}}},
      {"detection",
       {{"receiver_efficiency", c.detection.receiver_efficiency},
        {"background_rate_hz", c.detection.background_rate_hz},
        {"window_ps", c.detection.sync.window_ps},
        {"detector_jitter_ps", c.detection.sync.detector_jitter_ps},
        {"sync_rate_hz", c.detection.sync.sync_rate_hz}}},
      {"noise",
       {{"double_pair", c.noise.double_pair},
        {"distinguishability", c.noise.distinguishability},
        {"polarization_distortion", c.noise.polarization_distortion},
        {"background", c.noise.background}}},
  };
}

TargetsFile load_targets(const std::filesystem::path& path) {
  try {
    const json doc = parse_text(read_file(path));
    Fields f(doc, "");
    int version = 0;
    f.required("schema_version", version);
    if (version != kSchemaVersion) {
      throw ConfigError("field '/schema_version': unsupported version " + std::to_string(version));
    }
    std::string base;
    f.required("base_config", base);

    TargetsFile out;
    CalibrationTargets& t = out.targets;
    const json* deficits = f.child("deficits");
    if (!deficits) throw ConfigError("missing required field '/deficits'");
    Fields d(*deficits, "/deficits");
    for (std::size_t k = 0; k < kNoiseSources.size(); ++k) {
      const std::string key(to_string(kNoiseSources[k]));
      d.required(key.c_str(), t.deficits[k]);
    }
    d.finish();

    const json* anchors = f.child("loss_anchors");
    if (anchors) {
      if (!anchors->is_array()) throw ConfigError("field '/loss_anchors': expected an array");
      for (std::size_t i = 0; i < anchors->size(); ++i) {
        Fields a((*anchors)[i], "/loss_anchors/" + std::to_string(i));
        LossAnchor anchor{};
        a.required("elevation_deg", anchor.elevation_deg);
        a.required("loss_db", anchor.loss_db);
        a.finish();
        t.loss_anchors.push_back(anchor);
      }
    }
    f.required("total_counts", t.total_counts);
    f.optional("max_iterations", t.max_iterations);
    f.optional("tolerance", t.tolerance);
    f.finish();

    std::filesystem::path base_path(base);
    if (base_path.is_relative()) base_path = path.parent_path() / base_path;
    out.base = load_campaign_config(base_path);
    return out;
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace uplink
