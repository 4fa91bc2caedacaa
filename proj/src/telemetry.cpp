#include "fragsense/telemetry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace fragsense::telemetry {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Bilinear-transform biquad sections of a Butterworth-4 prototype.
// Section quality factors 1/(2 cos(pi/8)) and 1/(2 cos(3 pi/8)).
std::array<Biquad, 2> butter4_sections(double cutoff_hz, double rate_hz, bool highpass) {
  const double k = std::tan(M_PI * cutoff_hz / rate_hz);
  const double q1 = 1.0 / (2.0 * std::cos(M_PI / 8.0));
  const double q2 = 1.0 / (2.0 * std::cos(3.0 * M_PI / 8.0));
  std::array<Biquad, 2> out{};
  const std::array<double, 2> qs{q1, q2};
  for (std::size_t i = 0; i < 2; ++i) {
    const double q = qs[i];
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad s{};
    if (highpass) {
      s.b0 = norm;
      s.b1 = -2.0 * norm;
      s.b2 = norm;
    } else {
      s.b0 = k * k * norm;
      s.b1 = 2.0 * s.b0;
      s.b2 = s.b0;
    }
    s.a1 = 2.0 * (k * k - 1.0) * norm;
    s.a2 = (1.0 - k / q + k * k) * norm;
    out[i] = s;
  }
  return out;
}

void run_cascade_inplace(std::vector<double>& x, const std::array<Biquad, 2>& sos) {
  for (const Biquad& s : sos) {
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
      const double y = s.b0 * v + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
}

// Forward-backward run with odd-reflection padding on both ends.
std::vector<double> filtfilt(const std::vector<double>& x,
                             const std::array<Biquad, 2>& sos,
                             std::size_t pad) {
  const std::size_t n = x.size();
  pad = std::min(pad, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  run_cascade_inplace(ext, sos);
  std::reverse(ext.begin(), ext.end());
  run_cascade_inplace(ext, sos);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + static_cast<long>(pad),
                             ext.begin() + static_cast<long>(pad + n));
}

Channel zero_phase(const Channel& ch, double cutoff_hz, bool highpass_kind) {
  ch.require_nonempty(highpass_kind ? "highpass" : "lowpass");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= ch.rate_hz / 2.0)
    throw domain_error("filter cutoff must lie in (0, rate/2) on " + ch.name);
  const auto sos = butter4_sections(cutoff_hz, ch.rate_hz, highpass_kind);
  const std::size_t pad =
      static_cast<std::size_t>(std::ceil(3.0 * ch.rate_hz / cutoff_hz));
  Channel out = ch;
  out.samples = filtfilt(ch.samples, sos, pad);
  return out;
}

}  // namespace

Channel highpass(const Channel& ch, double cutoff_hz) {
  return zero_phase(ch, cutoff_hz, true);
}

Channel lowpass(const Channel& ch, double cutoff_hz) {
  return zero_phase(ch, cutoff_hz, false);
}

Channel derivative(const Channel& ch) {
  ch.require_nonempty("derivative");
  const auto& x = ch.samples;
  const std::size_t n = x.size();
  if (n < 3) throw domain_error("derivative needs at least 3 samples on " + ch.name);
  Channel out = ch;
  const double r = ch.rate_hz;
  out.samples[0] = (x[1] - x[0]) * r;
  for (std::size_t i = 1; i + 1 < n; ++i) out.samples[i] = (x[i + 1] - x[i - 1]) * 0.5 * r;
  out.samples[n - 1] = (x[n - 1] - x[n - 2]) * r;
  return out;
}

Channel lift_force(const Channel& p_base, const Channel& p_rod,
                   const CylinderGeometry& geom) {
  p_base.require_nonempty("lift_force");
  p_rod.require_nonempty("lift_force");
  geom.validate();
  if (p_base.rate_hz != p_rod.rate_hz || p_base.size() != p_rod.size())
    throw alignment_error("lift_force: pressure channels disagree in rate or length");
  constexpr double bar_to_pa = 1.0e5;
  Channel out = p_base;
  out.name = "lift_force";
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.samples[i] = 2.0 * (geom.area_base_m2 * p_base.samples[i] -
                            geom.area_rod_m2 * p_rod.samples[i]) *
                     bar_to_pa;
  }
  return out;
}

Channel resample(const Channel& ch, double target_hz) {
  ch.require_nonempty("resample");
  if (!(target_hz > 0.0)) throw domain_error("resample: non-positive target rate");
  if (target_hz == ch.rate_hz) return ch;
  if (ch.size() < 2)
    throw domain_error("resample: need at least 2 samples on " + ch.name);

  const Channel* src = &ch;
  Channel filtered;
  if (target_hz < ch.rate_hz) {
    // Antialias before decimating; 0.45 * target keeps the new Nyquist clean.
    filtered = lowpass(ch, 0.45 * target_hz);
    src = &filtered;
  }

  const double t_end = ch.t_end_s();
  const std::size_t n_out =
      static_cast<std::size_t>(std::floor((t_end - ch.t0_s) * target_hz)) + 1;
  Channel out;
  out.name = ch.name;
  out.rate_hz = target_hz;
  out.t0_s = ch.t0_s;
  out.samples.resize(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = ch.t0_s + static_cast<double>(k) / target_hz;
    const double pos = (t - ch.t0_s) * ch.rate_hz;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), src->size() - 2);
    const double frac = pos - static_cast<double>(i);
    out.samples[k] = src->samples[i] + frac * (src->samples[i + 1] - src->samples[i]);
  }
  return out;
}

}  // namespace fragsense::telemetry
