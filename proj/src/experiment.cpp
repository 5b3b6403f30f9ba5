#include "uplink/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace uplink {

std::string_view to_string(NoiseSource source) {
  switch (source) {
    case NoiseSource::DoublePair: return "double_pair";
    case NoiseSource::Distinguishability: return "distinguishability";
    case NoiseSource::PolarizationDistortion: return "polarization_distortion";
    case NoiseSource::Background: return "background";
  }
  return "?";
}

NoiseToggles NoiseToggles::only(NoiseSource source) {
  NoiseToggles t = none();
  switch (source) {
    case NoiseSource::DoublePair: t.double_pair = true; break;
    case NoiseSource::Distinguishability: t.distinguishability = true; break;
    case NoiseSource::PolarizationDistortion: t.polarization_distortion = true; break;
    case NoiseSource::Background: t.background = true; break;
  }
  return t;
}

bool NoiseToggles::enabled(NoiseSource source) const {
  switch (source) {
    case NoiseSource::DoublePair: return double_pair;
    case NoiseSource::Distinguishability: return distinguishability;
    case NoiseSource::PolarizationDistortion: return polarization_distortion;
    case NoiseSource::Background: return background;
  }
  return false;
}

PassGeometry CampaignConfig::orbit_geometry(std::size_t orbit_index) const {
  PassGeometry g = geometry;
  g.max_elevation_deg = orbits.at(orbit_index).max_elevation_deg;
  return g;
}

void CampaignConfig::validate() const {
  if (!(orbit_duration_s > 0) || !(slice_s > 0)) {
    throw std::invalid_argument("CampaignConfig: orbit_duration and slice must be positive");
  }
  if (orbits.empty()) throw std::invalid_argument("CampaignConfig: no orbits");
  if (schedule.size() != orbits.size()) throw std::invalid_argument("CampaignConfig: schedule must cover every orbit");
  if (std::set<Mub>(schedule.begin(), schedule.end()).size() != kMubLabels.size()) {
    throw std::invalid_argument("CampaignConfig: schedule must include all six input states");
  }
  for (const OrbitSpec& o : orbits) {
    if (!(o.max_elevation_deg > 0 && o.max_elevation_deg <= 90)) {
      throw std::invalid_argument("CampaignConfig: orbit max elevation must lie in (0, 90]");
    }
  }
  source.validate();
  bsm.validate();
  geometry.validate();
  link.validate();
  if (!(channel.polarization_jitter_rad >= 0)) throw std::invalid_argument("CampaignConfig: negative polarization jitter");
  if (!(detection.receiver_efficiency > 0 && detection.receiver_efficiency <= 1)) {
    throw std::invalid_argument("CampaignConfig: receiver_efficiency must lie in (0, 1]");
  }
  if (!(detection.background_rate_hz >= 0) || !(detection.sync.window_ps > 0)) {
    throw std::invalid_argument("CampaignConfig: background rate and window must be non-negative");
  }
}

std::vector<Mub> round_robin_schedule(std::size_t orbits) {
  std::vector<Mub> out(orbits);
  for (std::size_t i = 0; i < orbits; ++i) out[i] = kMubLabels[i % kMubLabels.size()];
  return out;
}

FidelityEstimate estimate_fidelity(std::uint64_t correct, std::uint64_t wrong) {
  const double n = static_cast<double>(correct) + static_cast<double>(wrong);
  if (n < 1) throw std::invalid_argument("estimate_fidelity: no counts");
  const double c = static_cast<double>(correct), w = static_cast<double>(wrong);
  return {c / n, std::sqrt(c * w / (n * n * n))};
}

Rng orbit_stream(std::uint64_t seed, std::size_t orbit_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(orbit_index), static_cast<std::uint32_t>(orbit_index >> 32), 0x0b17u};
  return Rng(seq);
}

EffectiveNoise effective_noise(const CampaignConfig& c) {
  const NoiseToggles& n = c.noise;
  return {n.double_pair ? c.source.double_pair_fraction : 0.0, n.distinguishability ? c.bsm.mode_overlap : 1.0,
          n.polarization_distortion ? c.channel.delta_polarization_rad : 0.0,
          n.polarization_distortion ? c.channel.polarization_jitter_rad : 0.0,
          n.background ? c.detection.background_rate_hz : 0.0};
}

Photon3Branches photon3_branches(const PureState& input, double entangled_fidelity, double mode_overlap) {
  const DensityMatrix joint = tensor(DensityMatrix::from_pure(input), werner_pair(entangled_fidelity));
  const auto branches = bsm_apply(joint, BsmModel{mode_overlap});
  const double accepted = branches[0].probability + branches[1].probability;
  if (!(accepted > 0)) throw std::domain_error("photon3_branches: no accepted outcome");
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(1);
  return {{branches[0].photon3.value_or(mixed), branches[1].photon3.value_or(mixed)},
          {branches[0].probability / accepted, branches[1].probability / accepted}};
}

double signal_fidelity(const CampaignConfig& config, Mub state, bool feed_forward_on) {
  const EffectiveNoise eff = effective_noise(config);
  const PureState chi = mub_state<double>(state);
  const Photon3Branches b = photon3_branches(chi, config.source.entangled_fidelity, eff.mode_overlap);
  double f = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    DensityMatrix rho = expected_distortion(b.states[k], eff.delta_polarization_rad, eff.polarization_jitter_rad);
    if (feed_forward_on) rho = feed_forward(k == 0 ? BsmOutcome::PhiPlus : BsmOutcome::PhiMinus, rho);
    f += b.probability[k] * ((1.0 - eff.double_pair_fraction) * fidelity(chi, rho) + 0.5 * eff.double_pair_fraction);
  }
  return f;
}

namespace {

struct Slice {
  double t_s;
  double elevation_deg;
};

// Tracked time slices of an orbit, sampled at slice midpoints.
std::vector<Slice> tracked_slices(const CampaignConfig& c, std::size_t orbit_index) {
  std::vector<Slice> out;
  const double max_el = c.orbits.at(orbit_index).max_elevation_deg;
  if (max_el <= c.geometry.min_elevation_deg) return out;
  const PassGeometry g = c.orbit_geometry(orbit_index);
  const auto n = static_cast<long>(std::llround(c.orbit_duration_s / c.slice_s));
  for (long k = 0; k < n; ++k) {
    const double t = -0.5 * c.orbit_duration_s + (k + 0.5) * c.slice_s;
    const double e = elevation_deg(g, t);
    if (e >= g.min_elevation_deg) out.push_back({t, e});
  }
  return out;
}

double signal_rate_hz(const CampaignConfig& c, const PassGeometry& g, const Slice& s) {
  const double loss = link_loss_db(s.elevation_deg, s.t_s, g, c.link);
  return c.source.fourfold_ground_rate_hz() * transmittance_from_db(loss) * c.detection.receiver_efficiency;
}

double accidental_rate_hz(const CampaignConfig& c, double background_hz) {
  return accidental_rate(c.source.fourfold_ground_rate_hz(), background_hz, c.detection.sync.window_ps * 1e-12);
}

// Analyzer port (0 = chi, 1 = chi_perp) that counts as correct after the pi
// phase post-processing of a phi- outcome.
int correct_port(const PureState& chi, BsmOutcome outcome) {
  if (outcome == BsmOutcome::PhiPlus) return 0;
  return overlap(chi, apply_unitary(chi, pauli_z<double>(), {0})) > 0.5 ? 0 : 1;
}

long long poisson(double mean, Rng& rng) {
  if (!(mean > 0)) return 0;
  return std::poisson_distribution<long long>(mean)(rng);
}

}  // namespace

OrbitRecord run_orbit(const CampaignConfig& c, std::size_t orbit_index, Rng& rng) {
  OrbitRecord rec;
  rec.index = orbit_index;
  rec.date = c.orbits.at(orbit_index).date;
  rec.max_elevation_deg = c.orbits[orbit_index].max_elevation_deg;
  rec.state = c.schedule.at(orbit_index);

  const EffectiveNoise eff = effective_noise(c);
  const PureState chi = mub_state<double>(rec.state);
  const Photon3Branches branches = photon3_branches(chi, c.source.entangled_fidelity, eff.mode_overlap);
  const std::array<int, 2> good{correct_port(chi, BsmOutcome::PhiPlus), correct_port(chi, BsmOutcome::PhiMinus)};
  SourceModel source = c.source;
  source.double_pair_fraction = eff.double_pair_fraction;
  const double acc_rate = accidental_rate_hz(c, eff.background_rate_hz);

  std::bernoulli_distribution phi_plus(branches.probability[0]);
  std::bernoulli_distribution coin(0.5);
  const Operator mixed = Operator::Identity(2, 2) / 2.0;

  auto record = [&](int outcome, int port) {
    ++rec.counts[outcome][port];
    if (port == good[outcome]) {
      ++rec.correct;
    } else {
      ++rec.wrong;
    }
  };

  const std::vector<Slice> slices = tracked_slices(c, orbit_index);
  if (slices.empty()) return rec;
  const PassGeometry g = c.orbit_geometry(orbit_index);
  for (const Slice& s : slices) {
    rec.tracked_s += c.slice_s;
    const long long events = poisson(signal_rate_hz(c, g, s) * c.slice_s, rng);
    for (long long e = 0; e < events; ++e) {
      const Emission emission = sample_emission(source, rng);
      const int outcome = phi_plus(rng) ? 0 : 1;
      const Operator& rho = emission == Emission::DoublePair ? mixed : branches.states[outcome].matrix();
      const Matrix2 u = polarization_distortion(eff.delta_polarization_rad, eff.polarization_jitter_rad, rng);
      const Ket v = u.adjoint() * chi.amplitudes();
      const double p_chi = std::clamp((v.adjoint() * rho * v)(0, 0).real(), 0.0, 1.0);
      record(outcome, std::bernoulli_distribution(p_chi)(rng) ? 0 : 1);
      ++rec.signal_events;
    }
    const long long accidentals = poisson(acc_rate * c.slice_s, rng);
    for (long long a = 0; a < accidentals; ++a) {
      const int outcome = coin(rng) ? 0 : 1;
      record(outcome, coin(rng) ? 0 : 1);
      ++rec.accidental_events;
    }
  }
  return rec;
}

CampaignResult run_campaign(const CampaignConfig& config) {
  config.validate();
  CampaignResult out;
  out.orbits.reserve(config.orbits.size());
  for (std::size_t i = 0; i < config.orbits.size(); ++i) {
    Rng rng = orbit_stream(config.seed, i);
    out.orbits.push_back(run_orbit(config, i, rng));
  }
  for (std::size_t s = 0; s < kMubLabels.size(); ++s) out.states[s].state = kMubLabels[s];
  for (const OrbitRecord& r : out.orbits) {
    StateResult& sr = out.states[static_cast<std::size_t>(r.state)];
    sr.correct += r.correct;
    sr.wrong += r.wrong;
    out.total_counts += r.total();
  }
  double sum = 0.0, var = 0.0;
  int with_data = 0;
  for (StateResult& sr : out.states) {
    if (sr.correct + sr.wrong == 0) continue;
    sr.estimate = estimate_fidelity(sr.correct, sr.wrong);
    sum += sr.estimate->fidelity;
    var += sr.estimate->sigma * sr.estimate->sigma;
    ++with_data;
  }
  if (with_data > 0) {
    out.mean_fidelity = sum / with_data;
    out.mean_sigma = std::sqrt(var) / with_data;
  }
  return out;
}

ExpectedCounts expected_orbit_counts(const CampaignConfig& c, std::size_t orbit_index) {
  ExpectedCounts out;
  const std::vector<Slice> slices = tracked_slices(c, orbit_index);
  if (slices.empty()) return out;
  const PassGeometry g = c.orbit_geometry(orbit_index);
  const double acc = accidental_rate_hz(c, effective_noise(c).background_rate_hz);
  for (const Slice& s : slices) {
    out.signal += signal_rate_hz(c, g, s) * c.slice_s;
    out.accidental += acc * c.slice_s;
    out.tracked_s += c.slice_s;
  }
  return out;
}

AnalyticResult analytic_campaign(const CampaignConfig& config, bool feed_forward_on) {
  config.validate();
  AnalyticResult out;
  std::array<bool, 6> scheduled{};
  for (std::size_t i = 0; i < config.orbits.size(); ++i) {
    const auto s = static_cast<std::size_t>(config.schedule[i]);
    const ExpectedCounts e = expected_orbit_counts(config, i);
    out.signal_counts[s] += e.signal;
    out.accidental_counts[s] += e.accidental;
    scheduled[s] = true;
  }
  double sum = 0.0;
  int used = 0;
  for (std::size_t s = 0; s < kMubLabels.size(); ++s) {
    const double fs = signal_fidelity(config, kMubLabels[s], feed_forward_on);
    out.signal_fidelity[s] = fs;
    const double n = out.signal_counts[s] + out.accidental_counts[s];
    out.fidelity[s] = n > 0 ? (out.signal_counts[s] * fs + 0.5 * out.accidental_counts[s]) / n : fs;
    out.total_counts += n;
    if (scheduled[s]) {
      sum += out.fidelity[s];
      ++used;
    }
  }
  out.mean_fidelity = sum / used;
  return out;
}

ErrorBudget error_budget(const CampaignConfig& config) {
  ErrorBudget out;
  CampaignConfig c = config;
  for (std::size_t k = 0; k < kNoiseSources.size(); ++k) {
    c.noise = NoiseToggles::only(kNoiseSources[k]);
    out.deficit[k] = 1.0 - analytic_campaign(c).mean_fidelity;
  }
  c.noise = NoiseToggles{};
  out.all_on = 1.0 - analytic_campaign(c).mean_fidelity;
  c.noise = NoiseToggles::none();
  out.baseline = 1.0 - analytic_campaign(c).mean_fidelity;
  return out;
}

namespace {

Eigen::Vector3d random_direction(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Eigen::Vector3d bloch_vector(const PureState& psi) {
  const std::complex<double> a = psi[0], b = psi[1];
  const std::complex<double> ab = std::conj(a) * b;
  return {2 * ab.real(), 2 * ab.imag(), std::norm(a) - std::norm(b)};
}

}  // namespace

double classical_baseline(std::size_t samples, Rng& rng, const BaselineOptions& options) {
  if (samples == 0) throw std::invalid_argument("classical_baseline: need at least one sample");
  std::optional<Eigen::Vector3d> fixed_r;
  if (options.fixed_input) fixed_r = bloch_vector(*options.fixed_input);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::Vector3d r = fixed_r ? *fixed_r : random_direction(rng);
    const Eigen::Vector3d m = options.fixed_axis ? options.fixed_axis->normalized() : random_direction(rng);
    const double c = r.dot(m);
    // outcome +m with probability (1 + c)/2; the resent eigenstate then has
    // fidelity (1 +/- c)/2 with the input
    const bool plus = u(rng) < 0.5 * (1.0 + c);
    total += plus ? 0.5 * (1.0 + c) : 0.5 * (1.0 - c);
  }
  return total / static_cast<double>(samples);
}

FibreComparison fibre_comparison(double fourfold_rate_hz, double distance_km, double loss_db_per_km) {
  if (!(fourfold_rate_hz > 0) || distance_km < 0 || loss_db_per_km < 0) {
    throw std::invalid_argument("fibre_comparison: rate must be positive, distance and loss non-negative");
  }
  FibreComparison out;
  out.loss_db = distance_km * loss_db_per_km;
  out.transmittance = std::pow(10.0, -out.loss_db / 10.0);
  out.waiting_s = 1.0 / (fourfold_rate_hz * out.transmittance);
  out.waiting_years = out.waiting_s / (365.25 * 86400.0);
  return out;
}

}  // namespace uplink
