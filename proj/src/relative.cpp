#include "fragsense/relative.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fragsense::relative {

namespace {

struct MeanStd {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  out.n = static_cast<int>(v.size());
  if (v.empty()) return out;
  double s = 0.0;
  for (double x : v) s += x;
  out.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double q = 0.0;
    for (double x : v) q += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(q / static_cast<double>(v.size() - 1));
  }
  return out;
}

std::vector<double> zeta_values(const std::vector<features::FeatureRow>& rows) {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.kind == "zeta") v.push_back(r.value);
  return v;
}

}  // namespace

ReferenceCalibration calibrate(const std::vector<features::FeatureRow>& rows,
                               const Scope& scope, const std::string& pile_label) {
  std::vector<features::FeatureRow> sel;
  std::set<int> epochs;
  for (const auto& r : rows) {
    if (r.kind != "zeta" || r.pile_label != pile_label) continue;
    if (!scope.matches(r)) continue;
    sel.push_back(r);
    epochs.insert(r.epoch);
  }
  if (epochs.size() > 1)
    throw scope_error("calibrate: scope '" + scope.str() +
                      "' mixes sensor epochs; calibrations never pool across them");
  const auto stats = mean_std(zeta_values(sel));
  if (stats.n < 2)
    throw insufficient_data_error("calibrate: fewer than 2 zeta samples for pile " +
                                  pile_label + " in scope " + scope.str());
  ReferenceCalibration cal;
  cal.scope = scope;
  cal.pile_label = pile_label;
  cal.mu_ref = stats.mean;
  cal.sigma_ref = stats.sd;
  cal.n_trials = stats.n;
  return cal;
}

RelativeEstimate relative_size(const std::vector<features::FeatureRow>& zeta_rows,
                               const ReferenceCalibration& ref) {
  if (!(ref.mu_ref > 0.0))
    throw degenerate_reference_error("relative_size: non-positive reference mean");
  std::vector<features::FeatureRow> sel;
  for (const auto& r : zeta_rows) {
    if (r.kind != "zeta") continue;
    if (r.source != ref.scope.source)
      throw scope_error("relative_size: feature source " + r.source +
                        " does not match calibration scope " + ref.scope.source);
    sel.push_back(r);
  }
  const auto stats = mean_std(zeta_values(sel));
  if (stats.n == 0) throw insufficient_data_error("relative_size: no zeta rows");

  RelativeEstimate est;
  est.pile_label = sel.front().pile_label;
  est.operator_id = sel.front().operator_id;
  est.n = stats.n;
  est.ratio = stats.mean / ref.mu_ref;
  // Independent samples: var(ratio) ~ (sd_i^2/n_i + ratio^2 sd_ref^2/n_ref) / mu_ref^2.
  const double var_i = stats.n > 1 ? stats.sd * stats.sd / stats.n : 0.0;
  const double var_r =
      ref.n_trials > 1 ? ref.sigma_ref * ref.sigma_ref / ref.n_trials : 0.0;
  est.ratio_std =
      std::sqrt(var_i + est.ratio * est.ratio * var_r) / ref.mu_ref;
  if (ref.xbar_ref_mm) est.xbar_est_mm = est.ratio * *ref.xbar_ref_mm;
  est.cross_operator =
      ref.scope.operator_id && *ref.scope.operator_id != est.operator_id;
  return est;
}

std::string size_class_name(SizeClass c) {
  switch (c) {
    case SizeClass::smaller: return "smaller";
    case SizeClass::indistinguishable: return "indistinguishable";
    case SizeClass::larger: return "larger";
  }
  return "?";
}

double z_value(PBound p) {
  switch (p) {
    case PBound::p90: return 1.645;
    case PBound::p95: return 1.960;
    case PBound::p99: return 2.576;
  }
  return 0.0;
}

PBound parse_p_bound(const std::string& s) {
  if (s == "0.90" || s == "0.9" || s == "90") return PBound::p90;
  if (s == "0.95" || s == "95") return PBound::p95;
  if (s == "0.99" || s == "99") return PBound::p99;
  throw config_error("unknown probability bound '" + s + "' (0.90|0.95|0.99)");
}

SizeClass classify(double zeta_value, const ReferenceCalibration& ref, PBound p) {
  if (!(ref.sigma_ref > 0.0))
    throw degenerate_reference_error("classify: reference sigma is zero");
  const double z = (zeta_value - ref.mu_ref) / ref.sigma_ref;
  const double zp = z_value(p);
  if (z < -zp) return SizeClass::smaller;
  if (z > zp) return SizeClass::larger;
  return SizeClass::indistinguishable;
}

std::vector<SummaryRow> summarize(const std::vector<features::FeatureRow>& zeta_rows,
                                  const ReferenceCalibration& ref) {
  std::map<std::pair<std::string, std::string>, std::vector<features::FeatureRow>>
      groups;
  for (const auto& r : zeta_rows) {
    if (r.kind != "zeta" || r.source != ref.scope.source) continue;
    groups[{r.pile_label, r.operator_id}].push_back(r);
  }

  std::vector<SummaryRow> out;
  for (const auto& [key, rows] : groups) {
    if (rows.empty()) continue;
    const auto est = relative_size(rows, ref);
    const auto stats = mean_std(zeta_values(rows));
    SummaryRow s;
    s.pile_label = key.first;
    s.operator_id = key.second;
    s.source = ref.scope.source;
    s.ratio_mean = est.ratio;
    s.ratio_std = stats.sd / ref.mu_ref;
    s.ratio_se = est.ratio_std;
    s.n = est.n;
    s.xbar_est_mm = est.xbar_est_mm;
    s.cross_operator = est.cross_operator;
    if (ref.sigma_ref > 0.0) {
      for (PBound p : {PBound::p90, PBound::p95, PBound::p99}) {
        ClassCounts cc;
        for (const auto& r : rows) {
          switch (classify(r.value, ref, p)) {
            case SizeClass::smaller: ++cc.smaller; break;
            case SizeClass::indistinguishable: ++cc.indistinguishable; break;
            case SizeClass::larger: ++cc.larger; break;
          }
        }
        const char* name = p == PBound::p90 ? "0.90" : p == PBound::p95 ? "0.95" : "0.99";
        s.class_counts[name] = cc;
      }
    }
    out.push_back(std::move(s));
  }
  return out;  // std::map iteration already sorts by (pile, operator)
}

}  // namespace fragsense::relative
