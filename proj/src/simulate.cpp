#include "fragsense/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fragsense/rng.hpp"

namespace fragsense::simulate {

namespace {

constexpr double kKgPerMm3PerDensity = 1.0e-6;  // t/m^3 -> kg/mm^3

double particle_mass_kg(double d_mm, double density_t_per_m3) {
  return density_t_per_m3 * kKgPerMm3PerDensity * d_mm * d_mm * d_mm;
}

// Tabulated inverse CDF of the per-particle size law q(u) ~ p(u) / u^3,
// p being the Weibull mass density. Log grid, trapezoidal cumulative.
class SizeSampler {
 public:
  explicit SizeSampler(const RockPileSpec& spec, int grid = 4096) {
    const double ln_lo = std::log(spec.d_min_mm);
    const double ln_hi = std::log(spec.d_max_mm);
    u_.resize(grid);
    cdf_.resize(grid);
    std::vector<double> q(grid);
    for (int i = 0; i < grid; ++i) {
      const double u = std::exp(ln_lo + (ln_hi - ln_lo) * i / (grid - 1));
      u_[i] = u;
      const double t = std::pow(u / spec.model.x_c_mm, spec.model.n);
      const double p =
          spec.model.n / spec.model.x_c_mm *
          std::pow(u / spec.model.x_c_mm, spec.model.n - 1.0) * std::exp(-t);
      q[i] = p / (u * u * u);
    }
    cdf_[0] = 0.0;
    for (int i = 1; i < grid; ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * (q[i] + q[i - 1]) * (u_[i] - u_[i - 1]);
    const double z = cdf_.back();
    for (double& c : cdf_) c /= z;
  }

  double draw(Rng& rng) const {
    const double r = rng.uniform01();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), r);
    if (it == cdf_.begin()) return u_.front();
    if (it == cdf_.end()) return u_.back();
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double frac = (r - cdf_[i - 1]) / (cdf_[i] - cdf_[i - 1]);
    return u_[i - 1] + frac * (u_[i] - u_[i - 1]);
  }

 private:
  std::vector<double> u_;
  std::vector<double> cdf_;
};

}  // namespace

void RockPileSpec::validate() const {
  model.validate();
  if (!(density_t_per_m3 > 0.0)) throw domain_error("pile density must be positive");
  if (!(d_min_mm > 0.0))
    throw domain_error("pile " + label + ": d_min_mm must be positive");
  if (!(d_max_mm > d_min_mm))
    throw domain_error("pile " + label + ": d_max_mm must exceed d_min_mm");
  if (granulometry::rr_cdf(model, d_max_mm) < 0.01)
    throw domain_error("pile " + label +
                       ": d_max below the model's 1st mass percentile");
}

double ParticlePopulation::total_mass_kg() const {
  return std::accumulate(masses_kg.begin(), masses_kg.end(), 0.0);
}

ParticlePopulation sample_population(const RockPileSpec& spec, double target_mass_kg,
                                     std::uint64_t seed) {
  spec.validate();
  if (!(target_mass_kg > 0.0))
    throw domain_error("sample_population: target mass must be positive");
  const SizeSampler sampler(spec);
  Rng rng(seed);
  ParticlePopulation pop;
  double mass = 0.0;
  while (mass < target_mass_kg) {
    const double d = sampler.draw(rng);
    const double m = particle_mass_kg(d, spec.density_t_per_m3);
    pop.diameters_mm.push_back(d);
    pop.masses_kg.push_back(m);
    mass += m;
  }
  return pop;
}

PopulationStats population_stats(const ParticlePopulation& pop) {
  if (pop.count() == 0) throw domain_error("population_stats: empty population");
  PopulationStats st;
  st.count = pop.count();
  double sd = 0.0, sm = 0.0, smd = 0.0;
  for (std::size_t i = 0; i < pop.count(); ++i) {
    sd += pop.diameters_mm[i];
    sm += pop.masses_kg[i];
    smd += pop.masses_kg[i] * pop.diameters_mm[i];
  }
  st.d_bar_mm = sd / static_cast<double>(pop.count());
  st.mass_kg = sm;
  st.x_bar_mass_weighted_mm = smd / sm;
  return st;
}

void TrialSynthesisConfig::validate() const {
  if (!(duration_s > 0.0) || !(onset_s >= 0.0) || !(dig_duration_s > 0.0))
    throw config_error("trial synthesis: non-positive timing");
  if (onset_s + dig_duration_s > duration_s)
    throw config_error("trial synthesis: onset + dig duration exceeds duration");
  if (!(collision_span_s > 0.0) || collision_span_s > dig_duration_s)
    throw config_error("trial synthesis: collision span outside the dig");
  if (!(rate_imu_hz > 0.0) || !(rate_hydraulic_hz > 0.0) || !(rate_speed_hz > 0.0))
    throw config_error("trial synthesis: non-positive rate");
  if (!(amplitude_scale > 0.0) || !(decay_s_per_mm > 0.0) ||
      !(carrier_c1_hz_mm > 0.0) || !(carrier_c2_mm > 0.0))
    throw config_error("trial synthesis: non-positive burst parameter");
  const double f_top = carrier_c1_hz_mm / carrier_c2_mm;
  if (f_top >= rate_imu_hz / 2.0)
    throw config_error("trial synthesis: carrier map exceeds the IMU Nyquist");
}

namespace {

struct Collision {
  double t_s;
  double d_mm;
};

// Poisson-like arrivals with density decreasing linearly across the span
// (the bucket fills), plus an entry cluster of the largest particles so
// first contact registers immediately.
std::vector<Collision> schedule_collisions(const ParticlePopulation& pop,
                                           const TrialSynthesisConfig& cfg,
                                           Rng& rng) {
  const std::size_t n = pop.count();
  std::vector<Collision> cs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    cs[i].t_s = cfg.onset_s + cfg.collision_span_s * (1.0 - std::sqrt(1.0 - u));
    cs[i].d_mm = pop.diameters_mm[i];
  }
  // Indices of the three largest particles, moved to the first 20 ms.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + std::min<std::size_t>(3, n), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return pop.diameters_mm[a] > pop.diameters_mm[b];
                    });
  for (std::size_t k = 0; k < std::min<std::size_t>(3, n); ++k)
    cs[idx[k]].t_s = cfg.onset_s + rng.uniform01() * 0.02;
  std::sort(cs.begin(), cs.end(),
            [](const Collision& a, const Collision& b) { return a.t_s < b.t_s; });
  return cs;
}

void add_bursts(std::vector<double>& acc, double rate, double gain,
                const std::vector<Collision>& cs, const TrialSynthesisConfig& cfg) {
  const std::size_t n_total = acc.size();
  for (const Collision& c : cs) {
    const double amp = gain * cfg.amplitude_scale *
                       std::pow(c.d_mm / 100.0, cfg.amplitude_exponent);
    const double tau = cfg.decay_s_per_mm * c.d_mm;
    const double freq = cfg.carrier_c1_hz_mm / (c.d_mm + cfg.carrier_c2_mm);
    const auto i0 = static_cast<std::size_t>(std::ceil(c.t_s * rate));
    const auto len = std::min(
        n_total - i0, static_cast<std::size_t>(14.0 * tau * rate) + 4);
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(i0 + i) / rate;
      const double dt = t - c.t_s;
      // Carrier phased to absolute time: simultaneous rings stay coherent
      // and their envelopes add.
      acc[i0 + i] += amp * std::exp(-dt / tau) * std::sin(2.0 * M_PI * freq * t);
    }
  }
}

Channel make_channel(const std::string& name, double rate, double duration,
                     double fill = 0.0) {
  Channel ch;
  ch.name = name;
  ch.rate_hz = rate;
  ch.t0_s = 0.0;
  ch.samples.assign(static_cast<std::size_t>(duration * rate) + 1, fill);
  return ch;
}

}  // namespace

TrialRecord synthesize_trial(const ParticlePopulation& pop,
                             const TrialSynthesisConfig& cfg) {
  cfg.validate();

  Rng rng(cfg.seed);
  const double fs = cfg.rate_imu_hz;
  TrialRecord trial;
  // Zero-collision trials (empty population) carry no payload.
  if (pop.count() > 0) trial.payload_mass_kg = pop.total_mass_kg();

  const auto collisions = schedule_collisions(pop, cfg, rng);

  // Bucket IMU: z carries the full collision response, x/y attenuated
  // decorrelated copies. Boom IMU mirrors this on its x axis.
  auto bucket_z = make_channel("bucket_acc_z", fs, cfg.duration_s);
  add_bursts(bucket_z.samples, fs, 1.0, collisions, cfg);
  auto boom_x = make_channel("boom_acc_x", fs, cfg.duration_s);
  add_bursts(boom_x.samples, fs, cfg.boom_attenuation, collisions, cfg);

  auto bucket_x = make_channel("bucket_acc_x", fs, cfg.duration_s);
  auto bucket_y = make_channel("bucket_acc_y", fs, cfg.duration_s);
  auto boom_y = make_channel("boom_acc_y", fs, cfg.duration_s);
  auto boom_z = make_channel("boom_acc_z", fs, cfg.duration_s);
  for (std::size_t i = 0; i < bucket_z.size(); ++i) {
    bucket_x.samples[i] = 0.3 * bucket_z.samples[i];
    bucket_y.samples[i] = 0.2 * bucket_z.samples[i];
    boom_y.samples[i] = 0.25 * boom_x.samples[i];
    boom_z.samples[i] = 0.3 * boom_x.samples[i];
  }

  // Operator oscillation (sub-2 Hz) and sensor noise on every IMU axis.
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  std::vector<Channel*> imu = {&bucket_x, &bucket_y, &bucket_z,
                               &boom_x,   &boom_y,   &boom_z};
  for (Channel* ch : imu) {
    const bool boom = ch->name.rfind("boom", 0) == 0;
    const double amp = cfg.operator_osc_amp * (boom ? 1.4 : 1.0);
    const double fo = cfg.operator_osc_hz * (boom ? 0.7 : 1.0);
    for (std::size_t i = 0; i < ch->size(); ++i) {
      const double t = ch->time_at(i);
      ch->samples[i] += amp * std::sin(2.0 * M_PI * fo * t + phase) +
                        cfg.noise_std * rng.normal();
    }
  }

  const double dig_end = cfg.onset_s + cfg.dig_duration_s;

  // Bucket cylinder: flat before onset, ramp to the end extension across the
  // dig (or 65% of it for slow-ramp trials), operator oscillation on top.
  const double ramp_target = cfg.slow_ramp ? 290.0 : 460.0;
  auto d_bucket = make_channel("d_bucket", cfg.rate_hydraulic_hz, cfg.duration_s);
  auto d_lift = make_channel("d_lift", cfg.rate_hydraulic_hz, cfg.duration_s);
  for (std::size_t i = 0; i < d_bucket.size(); ++i) {
    const double t = d_bucket.time_at(i);
    const double u = std::clamp((t - cfg.onset_s) / cfg.dig_duration_s, 0.0, 1.2);
    double v = 40.0 + ramp_target * u;
    v += 8.0 * std::sin(2.0 * M_PI * cfg.operator_osc_hz * t + phase);
    d_bucket.samples[i] = v + 0.5 * rng.normal();
    d_lift.samples[i] = 120.0 + 300.0 * std::min(u, 1.0) + 1.0 * rng.normal();
  }

  // Pressures correlated with cumulative loaded mass plus entry transient.
  double cum = 0.0;
  double cube_total = 0.0;
  for (const Collision& c : collisions) cube_total += c.d_mm * c.d_mm * c.d_mm;
  std::size_t next_collision = 0;
  auto p_base = make_channel("p_base", cfg.rate_hydraulic_hz, cfg.duration_s);
  auto p_rod = make_channel("p_rod", cfg.rate_hydraulic_hz, cfg.duration_s);
  for (std::size_t i = 0; i < p_base.size(); ++i) {
    const double t = p_base.time_at(i);
    while (next_collision < collisions.size() && collisions[next_collision].t_s <= t) {
      const double d = collisions[next_collision].d_mm;
      cum += d * d * d;
      ++next_collision;
    }
    const double frac = cube_total > 0.0 ? cum / cube_total : 0.0;
    const double transient =
        t > cfg.onset_s && t < dig_end
            ? 12.0 * std::exp(-(t - cfg.onset_s) / 0.8)
            : 0.0;
    p_base.samples[i] = 45.0 + 90.0 * frac + transient + 0.4 * rng.normal();
    p_rod.samples[i] = 18.0 - 6.0 * frac + 0.2 * rng.normal();
  }

  // Machine speed: approach, bite into the pile, creep forward.
  auto speed = make_channel("speed", cfg.rate_speed_hz, cfg.duration_s);
  for (std::size_t i = 0; i < speed.size(); ++i) {
    const double t = speed.time_at(i);
    double v = 1.5;
    if (t > cfg.onset_s) v = 0.25 + 1.25 * std::exp(-(t - cfg.onset_s) / 1.2);
    speed.samples[i] = v + 0.03 * rng.normal();
  }

  for (Channel* ch : imu) trial.channels[ch->name] = std::move(*ch);
  trial.channels["d_bucket"] = std::move(d_bucket);
  trial.channels["d_lift"] = std::move(d_lift);
  trial.channels["p_base"] = std::move(p_base);
  trial.channels["p_rod"] = std::move(p_rod);
  trial.channels["speed"] = std::move(speed);
  return trial;
}

std::vector<RockPileSpec> paper_pile_presets() {
  // (n, x_c) of the four crushed piles from the sieve regressions; the
  // 0/1500 blasted pile is scaled for a ~4x mean-size contrast over 0/150.
  std::vector<RockPileSpec> piles = {
      {{0.8322, 12.0}, 2.63, 6.0, 30.0, "0/32"},
      {{0.7506, 16.0}, 2.63, 8.0, 40.0, "0/63"},
      {{0.5664, 20.0}, 2.63, 10.0, 50.0, "0/90"},
      {{0.8519, 78.0}, 2.63, 39.0, 195.0, "0/150"},
      {{0.9000, 320.0}, 2.63, 160.0, 800.0, "0/1500"},
  };
  return piles;
}

double preset_target_mass_kg(const RockPileSpec& spec, std::size_t target_particles) {
  spec.validate();
  // Mean particle mass under the size law, by quadrature on a log grid.
  const int grid = 2048;
  const double ln_lo = std::log(spec.d_min_mm);
  const double ln_hi = std::log(spec.d_max_mm);
  double zq = 0.0, zm = 0.0;
  double prev_u = 0.0, prev_q = 0.0, prev_qm = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double u = std::exp(ln_lo + (ln_hi - ln_lo) * i / (grid - 1));
    const double t = std::pow(u / spec.model.x_c_mm, spec.model.n);
    const double p = spec.model.n / spec.model.x_c_mm *
                     std::pow(u / spec.model.x_c_mm, spec.model.n - 1.0) *
                     std::exp(-t);
    const double q = p / (u * u * u);
    const double qm = q * particle_mass_kg(u, spec.density_t_per_m3);
    if (i > 0) {
      zq += 0.5 * (q + prev_q) * (u - prev_u);
      zm += 0.5 * (qm + prev_qm) * (u - prev_u);
    }
    prev_u = u;
    prev_q = q;
    prev_qm = qm;
  }
  return static_cast<double>(target_particles) * zm / zq;
}

std::vector<CampaignTrial> run_campaign(const CampaignConfig& cfg) {
  std::vector<CampaignTrial> out;
  int trial_counter = 0;
  for (std::size_t pi = 0; pi < cfg.piles.size(); ++pi) {
    const RockPileSpec& pile = cfg.piles[pi];
    const double target = preset_target_mass_kg(pile, cfg.particles_per_trial);
    const double nominal = granulometry::rr_mean(pile.model);
    for (int k = 0; k < cfg.trials_per_pile; ++k) {
      const std::uint64_t tseed =
          Rng::derive_seed(cfg.seed, pi * 100003ULL + static_cast<std::uint64_t>(k));
      const auto pop = sample_population(pile, target, tseed);

      TrialSynthesisConfig tc = cfg.base;
      tc.seed = Rng::derive_seed(tseed, 1);
      tc.slow_ramp = cfg.slow_ramp_fraction > 0.0 &&
                     (k < static_cast<int>(std::round(cfg.slow_ramp_fraction *
                                                      cfg.trials_per_pile)));
      // A capped window needs data past onset + 11 s.
      if (tc.slow_ramp) tc.duration_s = std::max(tc.duration_s, tc.onset_s + 12.5);

      CampaignTrial ct;
      ct.record = synthesize_trial(pop, tc);
      char id[32];
      std::snprintf(id, sizeof(id), "trial_%04d", trial_counter++);
      ct.trial_id = id;
      ct.pile_label = pile.label;
      ct.operator_id = cfg.operator_id;
      ct.record.trial_id = ct.trial_id;
      ct.record.pile_label = pile.label;
      ct.record.operator_id = cfg.operator_id;
      ct.record.day = 2;  // bucket IMU 2 epoch unless a campaign says otherwise
      ct.truth = population_stats(pop);
      ct.onset_s = tc.onset_s;
      ct.nominal_xbar_mm = nominal;
      out.push_back(std::move(ct));
    }
  }
  return out;
}

}  // namespace fragsense::simulate
