#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fragsense/errors.hpp"
#include "fragsense/features.hpp"

namespace fragsense::relative {

// Scope a calibration applies to: one signal source (channel + sensor epoch)
// and optionally one operator. Operator styles shift calibrations, so
// cross-operator use is allowed but flagged downstream.
struct Scope {
  std::string source;                      // e.g. "bucket/2"
  std::optional<std::string> operator_id;  // absent = pooled over operators

  bool matches(const features::FeatureRow& r) const {
    if (r.source != source) return false;
    return !operator_id || *operator_id == r.operator_id;
  }
  std::string str() const {
    return operator_id ? source + "@" + *operator_id : source;
  }
};

struct ReferenceCalibration {
  Scope scope;
  std::string pile_label;
  double mu_ref = 0.0;
  double sigma_ref = 0.0;  // unbiased (n-1) sample standard deviation
  int n_trials = 0;
  std::optional<double> xbar_ref_mm;
};

// Mean/std of the zeta features matching scope and pile. Throws if fewer
// than two samples match or the rows mix sensor epochs.
ReferenceCalibration calibrate(const std::vector<features::FeatureRow>& rows,
                               const Scope& scope, const std::string& pile_label);

struct RelativeEstimate {
  std::string pile_label;
  std::string operator_id;
  double ratio = 0.0;
  double ratio_std = 0.0;  // first-order (delta-method) propagation
  int n = 0;
  std::optional<double> xbar_est_mm;
  bool cross_operator = false;
};

// ratio = mean(zeta_i) / mu_ref; scope (source) must match the calibration.
RelativeEstimate relative_size(const std::vector<features::FeatureRow>& zeta_rows,
                               const ReferenceCalibration& ref);

enum class SizeClass { smaller, indistinguishable, larger };

std::string size_class_name(SizeClass c);

// Probability bounds the z-rule accepts.
enum class PBound { p90, p95, p99 };

double z_value(PBound p);
PBound parse_p_bound(const std::string& s);

// z = (zeta - mu_ref) / sigma_ref; strict inequalities, boundary values are
// indistinguishable.
SizeClass classify(double zeta_value, const ReferenceCalibration& ref, PBound p);

struct ClassCounts {
  int smaller = 0;
  int indistinguishable = 0;
  int larger = 0;
};

struct SummaryRow {
  std::string pile_label;
  std::string operator_id;
  std::string source;
  double ratio_mean = 0.0;
  double ratio_std = 0.0;  // per-trial ratio spread sigma_i / mu_ref, the
                           // "mu +/- sigma" convention of the report tables
  double ratio_se = 0.0;   // delta-method standard error of ratio_mean
  int n = 0;
  std::optional<double> xbar_est_mm;
  bool cross_operator = false;
  std::map<std::string, ClassCounts> class_counts;  // keyed "0.90"/"0.95"/"0.99"
};

// Per (pile, operator) relative estimates and per-bound classification
// counts against one reference calibration. Rows sorted by (pile, operator).
std::vector<SummaryRow> summarize(const std::vector<features::FeatureRow>& zeta_rows,
                                  const ReferenceCalibration& ref);

}  // namespace fragsense::relative
