#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fragsense/granulometry.hpp"
#include "fragsense/types.hpp"

namespace fragsense::simulate {

struct RockPileSpec {
  granulometry::RosinRammlerModel model;
  double density_t_per_m3 = 2.63;
  double d_min_mm = 0.0;  // lower truncation; must be > 0 (the implied
                          // per-particle size law diverges at zero)
  double d_max_mm = 0.0;  // upper truncation
  std::string label;

  void validate() const;
};

struct ParticlePopulation {
  std::vector<double> diameters_mm;
  std::vector<double> masses_kg;  // rho * d^3, unit-converted

  std::size_t count() const { return diameters_mm.size(); }
  double total_mass_kg() const;
};

struct PopulationStats {
  double d_bar_mm = 0.0;             // arithmetic mean size
  double x_bar_mass_weighted_mm = 0; // sum(m d) / sum(m)
  double mass_kg = 0.0;
  std::size_t count = 0;
};

// Inverse-transform draws of the per-particle size law implied by treating
// the Rosin-Rammler model as the pile's mass CDF (density ~ weibull(x)/x^3
// on [d_min, d_max]). Particles accumulate until total mass reaches target,
// which makes the empirical mass CDF converge to the truncated model law.
ParticlePopulation sample_population(const RockPileSpec& spec, double target_mass_kg,
                                     std::uint64_t seed);

PopulationStats population_stats(const ParticlePopulation& pop);

struct TrialSynthesisConfig {
  double duration_s = 14.0;
  double onset_s = 3.0;
  double dig_duration_s = 9.0;     // d_bucket reaches the end extension then
  double collision_span_s = 5.0;   // arrivals occupy this much of the dig
  double rate_imu_hz = 1000.0;
  double rate_hydraulic_hz = 250.0;
  double rate_speed_hz = 20.0;

  // Impulse amplitude a0 (d/100mm)^p; p = 3 follows momentum transfer.
  double amplitude_scale = 1000.0;
  double amplitude_exponent = 3.0;
  // Ring-down time constant, seconds per mm of particle size.
  double decay_s_per_mm = 8.6e-3;
  // Carrier map f(d) = c1 / (d + c2). Near-degenerate by default: bursts
  // must stay mutually coherent or the feature integral loses linearity.
  double carrier_c1_hz_mm = 6.0e8;
  double carrier_c2_mm = 2.0e6;
  // Boom structure sees the same collisions attenuated.
  double boom_attenuation = 0.35;

  // Operator cylinder-command oscillation injected into d_bucket and the
  // low-frequency part of the accelerations.
  double operator_osc_hz = 0.8;
  double operator_osc_amp = 0.3;

  double noise_std = 0.02;
  std::uint64_t seed = 1;

  // Slow-ramp trials never reach the end extension inside the time cap.
  bool slow_ramp = false;

  void validate() const;
};

// Every registry channel, deterministic under cfg.seed. Acceleration
// channels superpose per-particle damped sinusoids over operator
// oscillation and noise; d_bucket ramps past 420 mm (unless slow_ramp);
// pressures track cumulative loaded mass.
TrialRecord synthesize_trial(const ParticlePopulation& pop,
                             const TrialSynthesisConfig& cfg);

// Bundled pile presets: the four crushed-aggregate models plus a blasted
// 0/1500 pile scaled to a ~4x mean-size contrast over 0/150.
std::vector<RockPileSpec> paper_pile_presets();

// Pile sized for trial synthesis: particle count stays in the hundreds so
// collisions remain resolvable events.
double preset_target_mass_kg(const RockPileSpec& spec, std::size_t target_particles);

struct CampaignTrial {
  std::string trial_id;
  std::string pile_label;
  std::string operator_id;
  TrialRecord record;
  PopulationStats truth;
  double onset_s = 0.0;
  double nominal_xbar_mm = 0.0;  // rr_mean of the pile model
};

struct CampaignConfig {
  std::vector<RockPileSpec> piles;
  int trials_per_pile = 10;
  std::size_t particles_per_trial = 130;
  std::string operator_id = "A";
  std::uint64_t seed = 1;
  double slow_ramp_fraction = 0.0;  // fraction of trials exercising the time cap
  TrialSynthesisConfig base;
};

std::vector<CampaignTrial> run_campaign(const CampaignConfig& cfg);

}  // namespace fragsense::simulate
