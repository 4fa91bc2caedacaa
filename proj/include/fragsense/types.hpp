#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fragsense/errors.hpp"

namespace fragsense {

// Uniformly sampled time series. Sample k has timestamp t0_s + k/rate_hz.
struct Channel {
  std::string name;
  double rate_hz = 0.0;
  double t0_s = 0.0;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t k) const { return t0_s + static_cast<double>(k) / rate_hz; }
  double duration_s() const {
    return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) / rate_hz;
  }
  double t_end_s() const { return t0_s + duration_s(); }

  void require_nonempty(const char* who) const {
    if (samples.empty()) throw domain_error(std::string(who) + ": empty channel " + name);
    if (!(rate_hz > 0.0)) throw domain_error(std::string(who) + ": non-positive rate on " + name);
  }
};

// Channel names accepted on the wire.
const std::vector<std::string>& channel_registry();
bool is_registered_channel(const std::string& name);

// One excavation pass with its multi-rate channels and metadata.
struct TrialRecord {
  std::string trial_id;
  std::string pile_label;
  std::string operator_id;
  int day = 1;
  std::optional<double> payload_mass_kg;
  std::map<std::string, Channel> channels;

  const Channel& channel(const std::string& name) const {
    auto it = channels.find(name);
    if (it == channels.end())
      throw schema_error("trial " + trial_id + ": missing channel " + name);
    return it->second;
  }
  bool has_channel(const std::string& name) const { return channels.count(name) != 0; }

  // Effective mass for feature normalization; absent payloads fall back to 1
  // so values stay comparable up to a constant factor that cancels in ratios.
  double mass_for_features() const { return payload_mass_kg.value_or(1.0); }

  // Bucket IMU epoch: unit 1 on day 1, unit 2 afterwards.
  int bucket_imu_epoch() const { return day <= 1 ? 1 : 2; }
};

struct CylinderGeometry {
  double area_base_m2 = 0.031415;
  double area_rod_m2 = 0.019175;

  void validate() const {
    if (!(area_base_m2 > area_rod_m2 && area_rod_m2 > 0.0))
      throw domain_error("cylinder geometry requires area_base > area_rod > 0");
  }
};

}  // namespace fragsense
