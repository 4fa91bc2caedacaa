#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fragsense/types.hpp"

namespace fragsense::cwt {

enum class WaveletFamily { analytic_morse, morlet };

struct WaveletSpec {
  WaveletFamily family = WaveletFamily::analytic_morse;
  // Morse parameters; time_bandwidth is the product P^2 = beta*gamma.
  double morse_symmetry = 3.0;
  double morse_time_bandwidth = 60.0;
  // Morlet center frequency in rad/sample at unit scale.
  double morlet_center_cycles = 6.0;
  int voices_per_octave = 10;

  void validate() const;
  // Peak of the mother wavelet's Fourier transform, rad/sample at scale 1.
  double peak_omega() const;
};

// Rows ordered by descending frequency; freqs_hz[i] = center_freq_hz / scale[i].
struct Scalogram {
  std::vector<double> freqs_hz;
  std::vector<double> times_s;
  std::vector<double> coeffs_mag;  // row-major, freqs x times
  double center_freq_hz = 0.0;
  // Per-column cone-of-influence boundary: rows below this frequency are
  // edge-affected. Marked, never discarded.
  std::vector<double> coi_freq_hz;

  std::size_t n_freqs() const { return freqs_hz.size(); }
  std::size_t n_times() const { return times_s.size(); }
  double mag(std::size_t fi, std::size_t ti) const {
    return coeffs_mag[fi * n_times() + ti];
  }
  const double* row(std::size_t fi) const { return coeffs_mag.data() + fi * n_times(); }
};

enum class Exec { serial, parallel };

// Magnitude CWT of ch over [t_start_s, t_end_s] on a log-spaced scale grid
// running from a 2-sample period up to the window length. Rows are
// independent; Exec::parallel distributes them over OpenMP threads and is
// bit-identical to Exec::serial.
Scalogram transform(const Channel& ch, double t_start_s, double t_end_s,
                    const WaveletSpec& spec = {}, Exec exec = Exec::parallel);

double scale_to_frequency(double s, double f_c);
double frequency_to_scale(double f, double f_c);

// Export as (freq_hz, t_s, magnitude) rows for plot tooling.
void write_scalogram_csv(const Scalogram& sg, const std::string& path);

}  // namespace fragsense::cwt
