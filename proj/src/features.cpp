#include "fragsense/features.hpp"

#include <algorithm>
#include <cmath>

#include "fragsense/telemetry.hpp"

namespace fragsense::features {

std::string source_name(Source s) {
  switch (s) {
    case Source::bucket_imu: return "bucket";
    case Source::boom_imu: return "boom";
    case Source::lift_force: return "lift";
  }
  return "?";
}

Source parse_source(const std::string& name) {
  if (name == "bucket") return Source::bucket_imu;
  if (name == "boom") return Source::boom_imu;
  if (name == "lift") return Source::lift_force;
  throw config_error("unknown source '" + name + "' (expected bucket|boom|lift)");
}

std::string end_reason_name(EndReason r) {
  switch (r) {
    case EndReason::bucket_extension: return "bucket_extension";
    case EndReason::time_cap: return "time_cap";
    case EndReason::end_of_data: return "end_of_data";
  }
  return "?";
}

std::string DetectorConfig::accel_channel() const {
  switch (source) {
    case Source::bucket_imu: return "bucket_acc_z";
    case Source::boom_imu: return "boom_acc_x";
    case Source::lift_force:
      // Lift-force features borrow the bucket IMU for windowing.
      return "bucket_acc_z";
  }
  return "bucket_acc_z";
}

ExcavationWindow detect_window(const TrialRecord& trial, const DetectorConfig& cfg) {
  cfg.validate();
  const Channel& acc = trial.channel(cfg.accel_channel());
  const Channel& ext = trial.channel("d_bucket");
  acc.require_nonempty("detect_window");
  ext.require_nonempty("detect_window");

  const Channel jerk = telemetry::derivative(acc);
  double alpha1 = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < jerk.size(); ++i) {
    if (std::abs(jerk.samples[i]) > cfg.jerk_threshold) {
      alpha1 = jerk.time_at(i);
      found = true;
      break;
    }
  }
  if (!found)
    throw no_excavation_error("trial " + trial.trial_id +
                              ": jerk threshold never crossed");

  ExcavationWindow w;
  w.alpha1_s = alpha1;
  const double t_cap = alpha1 + cfg.time_cap_s;
  const double t_data_end = std::min(acc.t_end_s(), ext.t_end_s());

  double t_ext = t_data_end + 1.0;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    const double t = ext.time_at(i);
    if (t < alpha1) continue;
    if (ext.samples[i] >= cfg.end_extension_mm) {
      t_ext = t;
      break;
    }
  }

  if (t_ext <= t_cap && t_ext <= t_data_end) {
    w.alpha2_s = t_ext;
    w.end_reason = EndReason::bucket_extension;
  } else if (t_cap <= t_data_end) {
    w.alpha2_s = t_cap;
    w.end_reason = EndReason::time_cap;
  } else {
    w.alpha2_s = t_data_end;
    w.end_reason = EndReason::end_of_data;
  }
  if (!(w.alpha2_s > w.alpha1_s))
    throw no_excavation_error("trial " + trial.trial_id + ": empty excavation window");
  return w;
}

std::vector<double> per_scale_response(const cwt::Scalogram& sg,
                                       const ExcavationWindow& window,
                                       double mass_kg) {
  if (!(mass_kg > 0.0)) throw domain_error("per_scale_response: mass must be positive");
  const auto& t = sg.times_s;
  if (t.empty()) throw range_error("per_scale_response: empty scalogram");

  // Column range covered by [alpha1, alpha2].
  std::size_t i0 = 0;
  while (i0 < t.size() && t[i0] < window.alpha1_s - 1e-12) ++i0;
  std::size_t i1 = t.size();
  while (i1 > 0 && t[i1 - 1] > window.alpha2_s + 1e-12) --i1;
  if (i0 + 2 > i1)
    throw range_error("per_scale_response: window does not overlap the scalogram");

  const double norm = 1.0 / (mass_kg * window.duration_s());
  std::vector<double> v(sg.n_freqs());
  for (std::size_t fi = 0; fi < sg.n_freqs(); ++fi) {
    const double* row = sg.row(fi);
    double acc = 0.0;
    for (std::size_t k = i0; k + 1 < i1; ++k)
      acc += 0.5 * (row[k] + row[k + 1]) * (t[k + 1] - t[k]);
    v[fi] = acc * norm;
  }
  return v;
}

WaveletFeature beta(const cwt::Scalogram& sg, const ExcavationWindow& window,
                    double mass_kg) {
  const auto v = per_scale_response(sg, window, mass_kg);
  WaveletFeature f;
  f.kind = FeatureKind::beta;
  f.value = *std::max_element(v.begin(), v.end());
  f.window = window;
  f.f_min_hz = sg.freqs_hz.back();
  f.f_max_hz = sg.freqs_hz.front();
  return f;
}

WaveletFeature zeta(const cwt::Scalogram& sg, const ExcavationWindow& window,
                    double mass_kg, double f_min_hz, double f_max_hz,
                    double preprocessing_cutoff_hz) {
  if (f_min_hz < preprocessing_cutoff_hz)
    throw domain_error("zeta: f_min undercuts the preprocessing cutoff");
  const double grid_lo = std::min(sg.freqs_hz.front(), sg.freqs_hz.back());
  const double grid_hi = std::max(sg.freqs_hz.front(), sg.freqs_hz.back());
  if (f_min_hz >= f_max_hz || f_max_hz > grid_hi * (1.0 + 1e-9) ||
      f_max_hz <= grid_lo || f_min_hz >= grid_hi)
    throw domain_error("zeta: band outside the scalogram frequency grid");

  const auto v = per_scale_response(sg, window, mass_kg);

  // Rows arrive in descending frequency; integrate in ascending linear f.
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < sg.n_freqs(); ++i) {
    const double fa = sg.freqs_hz[i + 1];
    const double fb = sg.freqs_hz[i];
    if (fb <= f_min_hz || fa >= f_max_hz) continue;
    if (fa >= f_min_hz && fb <= f_max_hz)
      acc += 0.5 * (v[i] + v[i + 1]) * (fb - fa);
  }

  WaveletFeature f;
  f.kind = FeatureKind::zeta;
  f.value = acc;
  f.window = window;
  f.f_min_hz = f_min_hz;
  f.f_max_hz = f_max_hz;
  return f;
}

std::vector<FeatureRow> extract_features(const TrialRecord& trial, Source source,
                                         const PipelineConfig& cfg) {
  const DetectorConfig& det =
      source == Source::boom_imu ? cfg.boom_detector : cfg.bucket_detector;
  const double cutoff =
      source == Source::boom_imu || source == Source::lift_force
          ? cfg.cutoff_boom_hz
          : cfg.cutoff_bucket_hz;

  const ExcavationWindow w = detect_window(trial, det);

  Channel raw;
  if (source == Source::lift_force) {
    raw = telemetry::lift_force(trial.channel("p_base"), trial.channel("p_rod"));
  } else {
    raw = trial.channel(det.accel_channel());
  }
  const Channel filtered = telemetry::highpass(raw, cutoff);
  const auto sg = cwt::transform(filtered, w.alpha1_s, w.alpha2_s, cfg.wavelet,
                                 cfg.exec);

  const double mass = trial.mass_for_features();
  const double f_max = sg.freqs_hz.front();
  const WaveletFeature zb = beta(sg, w, mass);
  const WaveletFeature zz = zeta(sg, w, mass, cutoff, f_max, cutoff);

  const int epoch = source == Source::bucket_imu ? trial.bucket_imu_epoch() : 1;
  const std::string src_tag =
      source_name(source) + "/" + std::to_string(epoch);

  std::vector<FeatureRow> rows;
  for (const WaveletFeature* f : {&zb, &zz}) {
    FeatureRow r;
    r.trial_id = trial.trial_id;
    r.pile_label = trial.pile_label;
    r.operator_id = trial.operator_id;
    r.source = src_tag;
    r.epoch = epoch;
    r.kind = f->kind == FeatureKind::beta ? "beta" : "zeta";
    r.value = f->value;
    r.alpha1_s = w.alpha1_s;
    r.alpha2_s = w.alpha2_s;
    r.end_reason = end_reason_name(w.end_reason);
    r.f_min_hz = f->f_min_hz;
    r.f_max_hz = f->f_max_hz;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fragsense::features
