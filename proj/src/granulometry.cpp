#include "fragsense/granulometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fragsense::granulometry {

double rr_cdf(const RosinRammlerModel& model, double x_mm) {
  model.validate();
  if (x_mm < 0.0) throw domain_error("rr_cdf: negative size");
  if (x_mm == 0.0) return 0.0;
  return -std::expm1(-std::pow(x_mm / model.x_c_mm, model.n));
}

double rr_mean(const RosinRammlerModel& model) {
  model.validate();
  return model.x_c_mm * std::tgamma(1.0 + 1.0 / model.n);
}

double rr_quantile(const RosinRammlerModel& model, double p) {
  model.validate();
  if (!(p >= 0.0 && p < 1.0)) throw domain_error("rr_quantile: p must be in [0,1)");
  if (p == 0.0) return 0.0;
  return model.x_c_mm * std::pow(-std::log1p(-p), 1.0 / model.n);
}

void SieveTable::validate() const {
  if (sieve_mm.size() != passing_pct.size())
    throw schema_error("sieve table: size/passing column length mismatch");
  if (sieve_mm.size() < 2) throw insufficient_data_error("sieve table: too few rows");
  for (std::size_t i = 0; i < sieve_mm.size(); ++i) {
    if (!(sieve_mm[i] > 0.0)) throw domain_error("sieve table: non-positive sieve size");
    if (passing_pct[i] < 0.0 || passing_pct[i] > 100.0)
      throw domain_error("sieve table: passing outside [0, 100]");
    if (i > 0) {
      if (!(sieve_mm[i] > sieve_mm[i - 1]))
        throw domain_error("sieve table: sizes must ascend strictly");
      if (passing_pct[i] < passing_pct[i - 1])
        throw domain_error("sieve table: passing must be non-decreasing");
    }
  }
}

SieveTable load_sieve_csv(const std::string& path, const std::string& pile_label) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open sieve file " + path);
  SieveTable t;
  t.pile_label = pile_label;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind("sieve_mm", 0) != 0)
        throw parse_error(path, 1, "expected header sieve_mm,passing_pct");
      continue;
    }
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw parse_error(path, line_no, "expected two comma-separated columns");
    try {
      std::size_t pos = 0;
      const double x = std::stod(a, &pos);
      if (pos != a.size()) throw std::invalid_argument(a);
      const double p = std::stod(b, &pos);
      if (pos != b.size()) throw std::invalid_argument(b);
      t.sieve_mm.push_back(x);
      t.passing_pct.push_back(p);
    } catch (const std::exception&) {
      throw parse_error(path, line_no, "non-numeric cell");
    }
  }
  t.validate();
  return t;
}

std::vector<std::size_t> fit_row_selection(const SieveTable& table,
                                           const FitOptions& opts) {
  table.validate();
  const double lo_pct = opts.p_lo * 100.0;
  const double hi_min_pct = opts.p_hi_min * 100.0;
  const double hi_max_pct = opts.p_hi_max * 100.0;

  std::size_t first = table.passing_pct.size();
  for (std::size_t i = 0; i < table.passing_pct.size(); ++i) {
    if (table.passing_pct[i] >= lo_pct) {
      first = i;
      break;
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = first; i < table.passing_pct.size(); ++i) {
    const double p = table.passing_pct[i];
    if (p >= 100.0) break;  // P = 1 is singular in the linearized domain
    if (p > hi_max_pct) break;
    rows.push_back(i);
    if (p >= hi_min_pct) break;  // include the first row inside the upper band
  }
  return rows;
}

namespace {

// One Levenberg pass on the raw CDF residuals, seeded by the linear fit.
RosinRammlerModel refine_nonlinear(const SieveTable& table,
                                   const std::vector<std::size_t>& rows,
                                   RosinRammlerModel m) {
  double lambda = 1e-3;
  auto cost = [&](const RosinRammlerModel& mm) {
    double c = 0.0;
    for (std::size_t i : rows) {
      const double r = rr_cdf(mm, table.sieve_mm[i]) - table.passing_pct[i] / 100.0;
      c += r * r;
    }
    return c;
  };
  double best = cost(m);
  for (int it = 0; it < 60; ++it) {
    // Jacobian of P(x; n, x_c) at the selected rows.
    double jtj[2][2] = {{0, 0}, {0, 0}};
    double jtr[2] = {0, 0};
    for (std::size_t i : rows) {
      const double x = table.sieve_mm[i];
      const double u = std::pow(x / m.x_c_mm, m.n);
      const double e = std::exp(-u);
      const double dPdn = e * u * std::log(x / m.x_c_mm);
      const double dPdxc = -e * u * m.n / m.x_c_mm;
      const double r = (1.0 - e) - table.passing_pct[i] / 100.0;
      jtj[0][0] += dPdn * dPdn;
      jtj[0][1] += dPdn * dPdxc;
      jtj[1][1] += dPdxc * dPdxc;
      jtr[0] += dPdn * r;
      jtr[1] += dPdxc * r;
    }
    jtj[1][0] = jtj[0][1];
    const double a = jtj[0][0] * (1.0 + lambda), b = jtj[0][1];
    const double c = jtj[1][0], d = jtj[1][1] * (1.0 + lambda);
    const double det = a * d - b * c;
    if (det == 0.0) break;
    const double dn = (-jtr[0] * d + jtr[1] * b) / det;
    const double dxc = (jtr[0] * c - jtr[1] * a) / det;
    RosinRammlerModel trial{m.n + dn, m.x_c_mm + dxc};
    if (trial.n > 0.0 && trial.x_c_mm > 0.0) {
      const double tc = cost(trial);
      if (tc < best) {
        best = tc;
        m = trial;
        lambda = std::max(lambda * 0.5, 1e-9);
        if (std::abs(dn) < 1e-12 && std::abs(dxc) < 1e-10) break;
        continue;
      }
    }
    lambda *= 4.0;
    if (lambda > 1e8) break;
  }
  return m;
}

}  // namespace

RosinRammlerModel fit_rr(const SieveTable& table, const FitOptions& opts) {
  const auto rows = fit_row_selection(table, opts);
  if (rows.size() < 3)
    throw insufficient_data_error("fit_rr: fewer than 3 rows survive the constraints");

  // ln(-ln(1-P)) = n ln x - n ln x_c
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(rows.size());
  for (std::size_t i : rows) {
    const double x = std::log(table.sieve_mm[i]);
    const double y = std::log(-std::log1p(-table.passing_pct[i] / 100.0));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw domain_error("fit_rr: degenerate abscissae");
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  if (!(slope > 0.0)) throw domain_error("fit_rr: non-positive fitted uniformity index");

  RosinRammlerModel model{slope, std::exp(-intercept / slope)};
  model.validate();
  if (opts.nonlinear_refine) model = refine_nonlinear(table, rows, model);
  return model;
}

MassCdf::MassCdf(std::vector<double> diameters_mm, std::vector<double> masses_kg) {
  if (diameters_mm.empty() || diameters_mm.size() != masses_kg.size())
    throw domain_error("empirical mass CDF: empty or mismatched inputs");
  std::vector<std::size_t> idx(diameters_mm.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return diameters_mm[a] < diameters_mm[b];
  });
  total_ = 0.0;
  for (double w : masses_kg) {
    if (!(w > 0.0)) throw domain_error("empirical mass CDF: non-positive mass");
    total_ += w;
  }
  double cum = 0.0;
  for (std::size_t k : idx) {
    cum += masses_kg[k];
    if (!sizes_.empty() && sizes_.back() == diameters_mm[k]) {
      cum_.back() = cum / total_;
    } else {
      sizes_.push_back(diameters_mm[k]);
      cum_.push_back(cum / total_);
    }
  }
}

double MassCdf::operator()(double x_mm) const {
  auto it = std::upper_bound(sizes_.begin(), sizes_.end(), x_mm);
  if (it == sizes_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - sizes_.begin()) - 1];
}

double MassCdf::sup_distance(const RosinRammlerModel& model) const {
  double d = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    const double f = rr_cdf(model, sizes_[i]);
    d = std::max(d, std::abs(cum_[i] - f));  // just after the step
    d = std::max(d, std::abs(prev - f));     // just before the step
    prev = cum_[i];
  }
  return d;
}

double MassCdf::sup_distance_truncated(const RosinRammlerModel& model, double lo_mm,
                                       double hi_mm) const {
  const double flo = rr_cdf(model, lo_mm);
  const double fhi = rr_cdf(model, hi_mm);
  if (!(fhi > flo)) throw domain_error("sup_distance_truncated: empty mass interval");
  double d = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    const double f =
        std::clamp((rr_cdf(model, sizes_[i]) - flo) / (fhi - flo), 0.0, 1.0);
    d = std::max(d, std::abs(cum_[i] - f));
    d = std::max(d, std::abs(prev - f));
    prev = cum_[i];
  }
  return d;
}

}  // namespace fragsense::granulometry
