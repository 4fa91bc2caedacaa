#include "fragsense/cwt.hpp"

#include <fftw3.h>
#include <omp.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <mutex>

#include "fragsense/errors.hpp"

namespace fragsense::cwt {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex g_fftw_plan_mutex;

struct FftwBuf {
  fftw_complex* p = nullptr;
  explicit FftwBuf(std::size_t n) {
    p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  }
  ~FftwBuf() { fftw_free(p); }
  FftwBuf(const FftwBuf&) = delete;
  FftwBuf& operator=(const FftwBuf&) = delete;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Frequency response of the mother wavelet, normalized to peak value 2 so a
// unit real tone at a row's center frequency yields |W| = 1 (L1 convention).
double wavelet_hat(const WaveletSpec& spec, double omega) {
  if (omega <= 0.0) return 0.0;
  if (spec.family == WaveletFamily::morlet) {
    const double d = omega - spec.morlet_center_cycles;
    return 2.0 * std::exp(-0.5 * d * d);
  }
  const double gamma = spec.morse_symmetry;
  const double beta = spec.morse_time_bandwidth / gamma;
  const double wp = spec.peak_omega();
  return 2.0 * std::exp(beta * (std::log(omega) - std::log(wp)) -
                        (std::pow(omega, gamma) - std::pow(wp, gamma)));
}

}  // namespace

void WaveletSpec::validate() const {
  if (voices_per_octave < 4 || voices_per_octave > 48)
    throw domain_error("voices_per_octave must be in [4, 48]");
  if (family == WaveletFamily::analytic_morse) {
    if (!(morse_symmetry > 0.0))
      throw domain_error("morse symmetry must be positive");
    if (!(morse_time_bandwidth > morse_symmetry))
      throw domain_error("morse time-bandwidth must exceed symmetry");
  } else if (!(morlet_center_cycles > 0.0)) {
    throw domain_error("morlet center frequency must be positive");
  }
}

double WaveletSpec::peak_omega() const {
  if (family == WaveletFamily::morlet) return morlet_center_cycles;
  const double gamma = morse_symmetry;
  const double beta = morse_time_bandwidth / gamma;
  return std::pow(beta / gamma, 1.0 / gamma);
}

double scale_to_frequency(double s, double f_c) {
  if (!(s > 0.0) || !(f_c > 0.0))
    throw domain_error("scale_to_frequency requires positive s and f_c");
  return f_c / s;
}

double frequency_to_scale(double f, double f_c) {
  if (!(f > 0.0) || !(f_c > 0.0))
    throw domain_error("frequency_to_scale requires positive f and f_c");
  return f_c / f;
}

Scalogram transform(const Channel& ch, double t_start_s, double t_end_s,
                    const WaveletSpec& spec, Exec exec) {
  ch.require_nonempty("cwt::transform");
  spec.validate();
  constexpr std::size_t kMinWindow = 32;
  const double eps = 0.5 / ch.rate_hz;
  if (t_start_s < ch.t0_s - eps || t_end_s > ch.t_end_s() + eps || t_end_s <= t_start_s)
    throw range_error("cwt::transform: window outside channel extent of " + ch.name);

  const auto first = static_cast<std::size_t>(
      std::ceil((t_start_s - ch.t0_s) * ch.rate_hz - 1e-9));
  const auto last = static_cast<std::size_t>(
      std::floor((t_end_s - ch.t0_s) * ch.rate_hz + 1e-9));
  if (last >= ch.size() || last < first || last - first + 1 < kMinWindow)
    throw domain_error("cwt::transform: window shorter than 32 samples");
  const std::size_t n = last - first + 1;

  // Reflection padding to a power of two keeps edge artifacts off the window
  // and the FFT fast.
  const std::size_t len = next_pow2(2 * n);
  const std::size_t pad = std::min(n - 1, (len - n) / 2);
  FftwBuf sig(len), spec_buf(len);
  for (std::size_t i = 0; i < len; ++i) {
    sig.p[i][0] = 0.0;
    sig.p[i][1] = 0.0;
  }
  const double* x = ch.samples.data() + first;
  for (std::size_t i = 0; i < pad; ++i) sig.p[i][0] = x[pad - i];
  for (std::size_t i = 0; i < n; ++i) sig.p[pad + i][0] = x[i];
  for (std::size_t i = 0; i < pad; ++i) sig.p[pad + n + i][0] = x[n - 2 - i];

  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    fwd = fftw_plan_dft_1d(static_cast<int>(len), sig.p, spec_buf.p, FFTW_FORWARD,
                           FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(len), sig.p, spec_buf.p, FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  }
  fftw_execute_dft(fwd, sig.p, spec_buf.p);

  // Scale grid: 2-sample period up to the window length, log-spaced.
  const double wp = spec.peak_omega();
  const double s_min = wp / M_PI;
  const double s_max = wp * static_cast<double>(n) / (2.0 * M_PI);
  const int vpo = spec.voices_per_octave;
  const int n_scales =
      static_cast<int>(std::floor(vpo * std::log2(s_max / s_min))) + 1;

  Scalogram out;
  out.center_freq_hz = wp * ch.rate_hz / (2.0 * M_PI);
  out.freqs_hz.resize(n_scales);
  out.times_s.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.times_s[i] = ch.time_at(first + i);
  out.coeffs_mag.assign(static_cast<std::size_t>(n_scales) * n, 0.0);

  std::vector<double> scales(n_scales);
  for (int j = 0; j < n_scales; ++j) {
    scales[j] = s_min * std::pow(2.0, static_cast<double>(j) / vpo);
    out.freqs_hz[j] = scale_to_frequency(scales[j], out.center_freq_hz);
  }

  const double inv_len = 1.0 / static_cast<double>(len);
  auto run_row = [&](int j, fftw_complex* prod, fftw_complex* row) {
    const double s = scales[j];
    for (std::size_t k = 0; k < len; ++k) {
      // FFT bin k maps to angular frequency 2 pi k / len, negative past len/2.
      double w = 2.0 * M_PI * static_cast<double>(k) * inv_len;
      if (k > len / 2) w -= 2.0 * M_PI;
      const double h = wavelet_hat(spec, s * w);
      prod[k][0] = spec_buf.p[k][0] * h;
      prod[k][1] = spec_buf.p[k][1] * h;
    }
    fftw_execute_dft(bwd, prod, row);
    double* dst = out.coeffs_mag.data() + static_cast<std::size_t>(j) * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double re = row[pad + i][0] * inv_len;
      const double im = row[pad + i][1] * inv_len;
      dst[i] = std::sqrt(re * re + im * im);
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      FftwBuf prod(len), row(len);
#pragma omp for schedule(static)
      for (int j = 0; j < n_scales; ++j) run_row(j, prod.p, row.p);
    }
  } else {
    FftwBuf prod(len), row(len);
    for (int j = 0; j < n_scales; ++j) run_row(j, prod.p, row.p);
  }

  {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  // Cone of influence: e-folding time of the wavelet envelope at each row,
  // expressed as the lowest trustworthy frequency per column.
  const double fold =
      spec.family == WaveletFamily::morlet
          ? std::sqrt(2.0) * spec.morlet_center_cycles / (2.0 * M_PI)
          : std::sqrt(2.0 * spec.morse_time_bandwidth) / (2.0 * M_PI);
  out.coi_freq_hz.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = std::min(static_cast<double>(i),
                                 static_cast<double>(n - 1 - i)) /
                        ch.rate_hz;
    out.coi_freq_hz[i] = dist > 0.0 ? fold / dist : out.freqs_hz.front();
  }

  return out;
}

void write_scalogram_csv(const Scalogram& sg, const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"),
                                                    &std::fclose);
  if (!f) throw config_error("cannot open " + path + " for writing");
  std::fprintf(f.get(), "freq_hz,t_s,magnitude\n");
  for (std::size_t i = 0; i < sg.n_freqs(); ++i) {
    for (std::size_t k = 0; k < sg.n_times(); ++k) {
      std::fprintf(f.get(), "%.9g,%.9g,%.9g\n", sg.freqs_hz[i], sg.times_s[k],
                   sg.mag(i, k));
    }
  }
}

}  // namespace fragsense::cwt
