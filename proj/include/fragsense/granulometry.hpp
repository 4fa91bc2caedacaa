#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fragsense/errors.hpp"

namespace fragsense::granulometry {

// Two-parameter Weibull cumulative mass-fraction law.
struct RosinRammlerModel {
  double n = 1.0;      // uniformity index
  double x_c_mm = 1.0; // critical size, P(x_c) = 1 - 1/e

  void validate() const {
    if (!(n > 0.0) || !(x_c_mm > 0.0))
      throw domain_error("Rosin-Rammler parameters must be positive");
  }
};

double rr_cdf(const RosinRammlerModel& model, double x_mm);

// Mean size x_c * Gamma(1 + 1/n).
double rr_mean(const RosinRammlerModel& model);

// Size at a given cumulative mass fraction p in [0, 1).
double rr_quantile(const RosinRammlerModel& model, double p);

struct SieveTable {
  std::string pile_label;
  std::vector<double> sieve_mm;     // strictly ascending
  std::vector<double> passing_pct;  // non-decreasing, [0, 100]
  double sample_mass_kg = 0.0;

  void validate() const;
};

SieveTable load_sieve_csv(const std::string& path, const std::string& pile_label = "");

struct FitOptions {
  double p_lo = 0.15;       // keep rows with passing fraction >= p_lo
  double p_hi_min = 0.90;   // stop at the first row whose passing lies in
  double p_hi_max = 0.96;   // [p_hi_min, p_hi_max]
  bool nonlinear_refine = false;  // Levenberg pass on the raw residuals
};

// Least squares on ln(-ln(1-P)) = n ln x - n ln x_c over the constrained rows.
RosinRammlerModel fit_rr(const SieveTable& table, const FitOptions& opts = {});

// Indices of the rows the constraint filter selects (exposed for reporting).
std::vector<std::size_t> fit_row_selection(const SieveTable& table,
                                           const FitOptions& opts = {});

// Right-continuous empirical mass CDF of a particle collection.
class MassCdf {
 public:
  MassCdf(std::vector<double> diameters_mm, std::vector<double> masses_kg);

  double operator()(double x_mm) const;
  double total_mass_kg() const { return total_; }

  // sup_x |this(x) - other(x)|; evaluated at the step points.
  double sup_distance(const RosinRammlerModel& model) const;
  // Same, against a lower/upper truncated model renormalized on [lo, hi].
  double sup_distance_truncated(const RosinRammlerModel& model, double lo_mm,
                                double hi_mm) const;

 private:
  std::vector<double> sizes_;   // ascending unique
  std::vector<double> cum_;     // cumulative mass fraction at sizes_
  double total_ = 0.0;
};

}  // namespace fragsense::granulometry
