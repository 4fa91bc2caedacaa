// Wall-time comparison of the serial reference CWT against the
// OpenMP-parallel path, with a bit-identity check on every size.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "fragsense/cwt.hpp"
#include "fragsense/rng.hpp"

using namespace fragsense;

namespace {

Channel make_signal(std::size_t n, double rate) {
  Channel ch;
  ch.name = "bench";
  ch.rate_hz = rate;
  ch.samples.resize(n);
  Rng rng(12345);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    ch.samples[i] = std::sin(2.0 * M_PI * 40.0 * t) +
                    0.5 * std::sin(2.0 * M_PI * 180.0 * t) + 0.1 * rng.normal();
  }
  return ch;
}

double time_transform(const Channel& ch, double t1, cwt::Exec exec, int reps,
                      cwt::Scalogram* out) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double start = omp_get_wtime();
    auto sg = cwt::transform(ch, 0.0, t1, {}, exec);
    const double dt = omp_get_wtime() - start;
    if (dt < best) best = dt;
    if (out) *out = std::move(sg);
  }
  return best;
}

}  // namespace

int main() {
  const double rate = 1000.0;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%10s %8s %12s %12s %9s %s\n", "samples", "rows", "serial[ms]",
              "parallel[ms]", "speedup", "identical");

  for (std::size_t n : {2048u, 8192u, 16384u, 32768u}) {
    const Channel ch = make_signal(n, rate);
    const double t1 = static_cast<double>(n - 1) / rate;
    cwt::Scalogram a, b;
    const double ts = time_transform(ch, t1, cwt::Exec::serial, 3, &a);
    const double tp = time_transform(ch, t1, cwt::Exec::parallel, 3, &b);
    const bool same = a.coeffs_mag == b.coeffs_mag && a.freqs_hz == b.freqs_hz;
    std::printf("%10zu %8zu %12.2f %12.2f %8.2fx %s\n", n, a.n_freqs(),
                ts * 1e3, tp * 1e3, ts / tp, same ? "yes" : "NO");
    if (!same) return 1;
  }
  return 0;
}
