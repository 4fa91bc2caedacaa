#include <doctest.h>

#include <cmath>

#include "fragsense/telemetry.hpp"

using namespace fragsense;
using namespace fragsense::telemetry;

namespace {

Channel make(double rate, std::size_t n, double (*f)(double)) {
  Channel ch;
  ch.name = "test";
  ch.rate_hz = rate;
  ch.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) ch.samples[i] = f(static_cast<double>(i) / rate);
  return ch;
}

// Amplitude of a pure tone from the RMS over an integer number of cycles.
double tone_amplitude(const Channel& ch, double f0, double t_lo, double t_hi) {
  const double cycles = std::floor((t_hi - t_lo) * f0);
  REQUIRE(cycles >= 4);
  const auto i0 = static_cast<std::size_t>(t_lo * ch.rate_hz);
  const auto i1 = static_cast<std::size_t>((t_lo + cycles / f0) * ch.rate_hz);
  double acc = 0.0;
  for (std::size_t i = i0; i < i1; ++i) acc += ch.samples[i] * ch.samples[i];
  return std::sqrt(2.0 * acc / static_cast<double>(i1 - i0));
}

double db(double ratio) { return 20.0 * std::log10(ratio); }

}  // namespace

TEST_CASE("highpass rejects DC by 40 dB or more") {
  auto ch = make(1000.0, 4000, [](double) { return 9.81; });
  const auto out = highpass(ch, 2.0);
  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak < 0.0981);
  CHECK(out.rate_hz == ch.rate_hz);
  CHECK(ch.samples[0] == 9.81);  // input untouched
}

TEST_CASE("highpass passband gain within 1 dB") {
  auto ch = make(1000.0, 8000, [](double t) { return std::sin(2.0 * M_PI * 10.0 * t); });
  const auto out = highpass(ch, 2.0);
  const double amp = tone_amplitude(out, 10.0, 2.0, 6.0);
  CHECK(std::abs(db(amp)) < 1.0);
}

TEST_CASE("highpass stopband attenuation") {
  auto ch = make(1000.0, 16000,
                 [](double t) { return std::sin(2.0 * M_PI * 0.5 * t); });
  const auto out = highpass(ch, 4.0);
  const double amp = tone_amplitude(out, 0.5, 4.0, 12.0);
  CHECK(db(amp) < -20.0);
}

TEST_CASE("highpass is idempotent in the passband") {
  auto ch = make(1000.0, 8000, [](double t) { return std::sin(2.0 * M_PI * 10.0 * t); });
  const auto once = highpass(ch, 2.0);
  const auto twice = highpass(once, 2.0);
  const double a1 = tone_amplitude(once, 10.0, 2.0, 6.0);
  const double a2 = tone_amplitude(twice, 10.0, 2.0, 6.0);
  CHECK(std::abs(db(a2 / a1)) < 1.0);
}

TEST_CASE("highpass rejects cutoffs at or past Nyquist") {
  auto ch = make(100.0, 256, [](double) { return 0.0; });
  CHECK_THROWS_AS(highpass(ch, 50.0), domain_error);
  CHECK_THROWS_AS(highpass(ch, 80.0), domain_error);
}

TEST_CASE("derivative of a ramp is the slope everywhere") {
  auto ch = make(500.0, 100, [](double t) { return 5.0 * t + 2.0; });
  const auto d = derivative(ch);
  for (double v : d.samples) CHECK(v == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("derivative of a constant is zero") {
  auto ch = make(500.0, 64, [](double) { return 3.25; });
  const auto d = derivative(ch);
  for (double v : d.samples) CHECK(v == 0.0);
}

TEST_CASE("derivative tracks the analytic derivative of a sinusoid") {
  auto ch = make(1000.0, 4000, [](double t) { return std::sin(2.0 * M_PI * t); });
  const auto d = derivative(ch);
  double interior_err = 0.0;
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    const double want = 2.0 * M_PI * std::cos(2.0 * M_PI * d.time_at(i));
    interior_err = std::max(interior_err, std::abs(d.samples[i] - want));
  }
  CHECK(interior_err < 1e-4);
  // one-sided endpoints are first-order accurate
  const double want0 = 2.0 * M_PI;
  CHECK(std::abs(d.samples[0] - want0) < 0.025);
}

TEST_CASE("derivative is linear") {
  auto a = make(250.0, 300, [](double t) { return std::sin(3.0 * t); });
  auto b = make(250.0, 300, [](double t) { return std::cos(7.0 * t); });
  Channel combo = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    combo.samples[i] = 2.5 * a.samples[i] - 1.25 * b.samples[i];
  const auto da = derivative(a), db_ = derivative(b), dc = derivative(combo);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(dc.samples[i] ==
          doctest::Approx(2.5 * da.samples[i] - 1.25 * db_.samples[i]).epsilon(1e-12));
  }
}

TEST_CASE("derivative refuses fewer than 3 samples") {
  Channel ch;
  ch.name = "short";
  ch.rate_hz = 10.0;
  ch.samples = {1.0, 2.0};
  CHECK_THROWS_AS(derivative(ch), domain_error);
}

TEST_CASE("lift force evaluates the cylinder formula") {
  auto mk = [](double bar) {
    Channel c;
    c.name = "p";
    c.rate_hz = 250.0;
    c.samples.assign(10, bar);
    return c;
  };
  SUBCASE("zero pressures give zero force") {
    const auto f = lift_force(mk(0.0), mk(0.0));
    for (double v : f.samples) CHECK(v == 0.0);
  }
  SUBCASE("100/50 bar with the stock geometry") {
    const auto f = lift_force(mk(100.0), mk(50.0));
    for (double v : f.samples) CHECK(v == doctest::Approx(436550.0).epsilon(1e-12));
  }
  SUBCASE("rod-only pressure retracts") {
    const auto f = lift_force(mk(0.0), mk(100.0));
    for (double v : f.samples) CHECK(v == doctest::Approx(-383500.0).epsilon(1e-12));
  }
  SUBCASE("linearity in both channels") {
    const auto f1 = lift_force(mk(30.0), mk(10.0));
    const auto f2 = lift_force(mk(60.0), mk(20.0));
    for (std::size_t i = 0; i < f1.size(); ++i)
      CHECK(f2.samples[i] == doctest::Approx(2.0 * f1.samples[i]).epsilon(1e-12));
  }
  SUBCASE("mismatched channels are rejected") {
    auto shorter = mk(10.0);
    shorter.samples.pop_back();
    CHECK_THROWS_AS(lift_force(mk(10.0), shorter), alignment_error);
    auto other_rate = mk(10.0);
    other_rate.rate_hz = 100.0;
    CHECK_THROWS_AS(lift_force(mk(10.0), other_rate), alignment_error);
  }
}

TEST_CASE("resample identity at the same rate") {
  auto ch = make(250.0, 500, [](double t) { return std::sin(t); });
  const auto out = resample(ch, 250.0);
  CHECK(out.samples == ch.samples);
}

TEST_CASE("resample 1000 to 250 keeps a 10 Hz tone within 1%") {
  auto ch = make(1000.0, 8000,
                 [](double t) { return std::sin(2.0 * M_PI * 10.0 * t); });
  const auto out = resample(ch, 250.0);
  CHECK(out.rate_hz == 250.0);
  const double amp = tone_amplitude(out, 10.0, 2.0, 6.0);
  CHECK(std::abs(amp - 1.0) < 0.01);
}

TEST_CASE("resample upsamples a constant exactly") {
  auto ch = make(20.0, 100, [](double) { return 7.5; });
  const auto out = resample(ch, 1000.0);
  CHECK(out.rate_hz == 1000.0);
  for (double v : out.samples) CHECK(v == doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("resample rejects non-positive targets") {
  auto ch = make(100.0, 50, [](double) { return 1.0; });
  CHECK_THROWS_AS(resample(ch, 0.0), domain_error);
  CHECK_THROWS_AS(resample(ch, -5.0), domain_error);
}
