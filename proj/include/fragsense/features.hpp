#pragma once

#include <string>
#include <vector>

#include "fragsense/cwt.hpp"
#include "fragsense/types.hpp"

namespace fragsense::features {

enum class Source { bucket_imu, boom_imu, lift_force };

std::string source_name(Source s);
Source parse_source(const std::string& name);

enum class EndReason { bucket_extension, time_cap, end_of_data };

std::string end_reason_name(EndReason r);

struct ExcavationWindow {
  double alpha1_s = 0.0;
  double alpha2_s = 0.0;
  EndReason end_reason = EndReason::bucket_extension;

  double duration_s() const { return alpha2_s - alpha1_s; }
};

struct DetectorConfig {
  Source source = Source::bucket_imu;
  double jerk_threshold = 750.0;   // m/s^3; 750 bucket, 500 boom
  double end_extension_mm = 420.0;
  double time_cap_s = 11.0;

  static DetectorConfig bucket() { return {Source::bucket_imu, 750.0, 420.0, 11.0}; }
  static DetectorConfig boom() { return {Source::boom_imu, 500.0, 420.0, 11.0}; }

  void validate() const {
    if (!(jerk_threshold > 0.0) || !(end_extension_mm > 0.0) || !(time_cap_s > 0.0))
      throw domain_error("detector config fields must be positive");
  }
  // Axis aligned with the direction of travel: z on the bucket, x on the boom.
  std::string accel_channel() const;
};

// alpha1: first time |d/dt accel| exceeds the jerk threshold (raw channel).
// alpha2: earliest of bucket extension reaching end_extension_mm, the time
// cap, and end of data.
ExcavationWindow detect_window(const TrialRecord& trial, const DetectorConfig& cfg);

enum class FeatureKind { beta, zeta };

struct WaveletFeature {
  FeatureKind kind = FeatureKind::zeta;
  double value = 0.0;
  std::string source;  // channel + sensor epoch, e.g. "bucket_imu/2"
  ExcavationWindow window;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
};

// Per-scale statistic shared by beta and zeta: the mass- and duration-
// normalized time integral of each magnitude row over [alpha1, alpha2].
std::vector<double> per_scale_response(const cwt::Scalogram& sg,
                                       const ExcavationWindow& window,
                                       double mass_kg);

// Max over scales of the per-scale response.
WaveletFeature beta(const cwt::Scalogram& sg, const ExcavationWindow& window,
                    double mass_kg);

// Trapezoidal integral of the per-scale response over [f_min, f_max] in
// linear frequency. f_min must not undercut the preprocessing cutoff.
WaveletFeature zeta(const cwt::Scalogram& sg, const ExcavationWindow& window,
                    double mass_kg, double f_min_hz, double f_max_hz,
                    double preprocessing_cutoff_hz);

// One row of the feature report.
struct FeatureRow {
  std::string trial_id;
  std::string pile_label;
  std::string operator_id;
  std::string source;
  int epoch = 1;
  std::string kind;
  double value = 0.0;
  double alpha1_s = 0.0;
  double alpha2_s = 0.0;
  std::string end_reason;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
};

struct PipelineConfig {
  DetectorConfig bucket_detector = DetectorConfig::bucket();
  DetectorConfig boom_detector = DetectorConfig::boom();
  double cutoff_boom_hz = 2.0;
  double cutoff_bucket_hz = 4.0;
  cwt::WaveletSpec wavelet;
  cwt::Exec exec = cwt::Exec::parallel;
};

// Full per-trial pipeline for one source: detect, filter, transform, then
// emit the beta and zeta rows.
std::vector<FeatureRow> extract_features(const TrialRecord& trial, Source source,
                                         const PipelineConfig& cfg = {});

}  // namespace fragsense::features
