// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance is pinned here, in code.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fragsense/features.hpp"
#include "fragsense/granulometry.hpp"
#include "fragsense/relative.hpp"
#include "fragsense/report.hpp"
#include "fragsense/rng.hpp"
#include "fragsense/simulate.hpp"
#include "fragsense/telemetry.hpp"
#include "fragsense/trial_io.hpp"

using namespace fragsense;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void result(const char* id, bool pass, const std::string& detail) {
  std::printf("%-4s %-4s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string data_path(const std::string& rel) {
  return std::string(FRAGSENSE_DATA_DIR) + "/" + rel;
}

struct TableRow {
  const char* file;
  const char* label;
  double n, xc, xbar;
};
constexpr TableRow kTable[] = {
    {"sieve/0_32.csv", "0/32", 0.8322, 12.0, 13.0},
    {"sieve/0_63.csv", "0/63", 0.7506, 16.0, 19.0},
    {"sieve/0_90.csv", "0/90", 0.5664, 20.0, 33.0},
    {"sieve/0_150.csv", "0/150", 0.8519, 78.0, 84.0},
};

granulometry::RosinRammlerModel fit_fixture(const TableRow& row) {
  const auto table = granulometry::load_sieve_csv(data_path(row.file), row.label);
  return granulometry::fit_rr(table);
}

// ---------------------------------------------------------------- C1, C2, C3

void criterion_rr_reproduction() {
  bool ok = true;
  std::ostringstream note;
  for (const auto& row : kTable) {
    const auto m = fit_fixture(row);
    const double xbar = granulometry::rr_mean(m);
    const bool n_ok = std::abs(m.n / row.n - 1.0) <= 0.05;
    const bool xc_ok = std::abs(m.x_c_mm - row.xc) <= 1.0 ||
                       std::abs(m.x_c_mm / row.xc - 1.0) <= 0.05;
    const bool xb_ok =
        std::abs(xbar - row.xbar) <= 1.0 || std::abs(xbar / row.xbar - 1.0) <= 0.05;
    if (!(n_ok && xc_ok && xb_ok)) ok = false;
    note << row.label << ":n=" << m.n << ",xc=" << m.x_c_mm << ",xbar=" << xbar
         << " ";
  }
  result("C1", ok, "Rosin-Rammler reproduction vs published table | " + note.str());
}

void criterion_eq6_consistency() {
  // Mean-size identity on each fixture's full-precision regression vs the
  // published integer-mm mean; 0.5 mm covers the table's rounding.
  bool ok = true;
  std::ostringstream note;
  for (const auto& row : kTable) {
    const auto m = fit_fixture(row);
    const double diff = std::abs(granulometry::rr_mean(m) - row.xbar);
    if (diff > 0.5) ok = false;
    note << row.label << ":" << diff << "mm ";
  }
  // Informational: the same identity on the published (rounded) parameters.
  std::ostringstream rounded;
  for (const auto& row : kTable) {
    const double diff =
        std::abs(granulometry::rr_mean({row.n, row.xc}) - row.xbar);
    rounded << row.label << ":" << diff << "mm ";
  }
  result("C2", ok,
         "mean-size identity within table rounding | " + note.str() +
             "| rounded-input variant: " + rounded.str());
}

void criterion_sieve_ratios() {
  std::map<std::string, double> mean_mm;
  for (const auto& row : kTable)
    mean_mm[row.label] = std::round(granulometry::rr_mean(fit_fixture(row)));

  const std::map<std::string, double> want90 = {
      {"0/32", 0.39}, {"0/63", 0.58}, {"0/90", 1.0}, {"0/150", 2.55}};
  const std::map<std::string, double> want150 = {
      {"0/32", 0.15}, {"0/63", 0.23}, {"0/90", 0.39}, {"0/150", 1.0}};
  bool ok = true;
  std::ostringstream note;
  for (const auto& [ref, want] :
       std::vector<std::pair<std::string, const std::map<std::string, double>*>>{
           {"0/90", &want90}, {"0/150", &want150}}) {
    for (const auto& [pile, target] : *want) {
      const double ratio = mean_mm[pile] / mean_mm[ref];
      if (std::abs(ratio - target) > 0.01) ok = false;
      note << pile << "/" << ref << "=" << ratio << " ";
    }
  }
  result("C3", ok, "sieve mean-size ratios vs summary table | " + note.str());
}

// --------------------------------------------------------------------- C4

void criterion_tone_localization() {
  bool ok = true;
  std::ostringstream note;
  for (double f0 : {5.0, 25.0, 100.0}) {
    Channel ch;
    ch.name = "tone";
    ch.rate_hz = 1000.0;
    ch.samples.resize(4000);
    for (std::size_t i = 0; i < ch.samples.size(); ++i)
      ch.samples[i] = std::sin(2.0 * M_PI * f0 * static_cast<double>(i) / 1000.0);
    const auto sg = cwt::transform(ch, 0.0, ch.t_end_s());
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i < sg.n_freqs(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < sg.n_times(); ++k) acc += sg.mag(i, k);
      if (acc > best_v) {
        best_v = acc;
        best = i;
      }
    }
    const double voices = std::abs(std::log2(sg.freqs_hz[best] / f0)) * 10.0;
    if (voices > 1.0) ok = false;
    note << f0 << "Hz->" << sg.freqs_hz[best] << "Hz(" << voices << "v) ";
  }
  result("C4", ok, "CWT tone localization within one voice | " + note.str());
}

// --------------------------------------------------------------------- C5

double riemann_row_integral(const cwt::Scalogram& sg, std::size_t fi, double a1,
                            double a2) {
  const auto& t = sg.times_s;
  double acc = 0.0;
  const int subdiv = 512;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double lo = std::max(t[k], a1), hi = std::min(t[k + 1], a2);
    if (hi <= lo) continue;
    for (int j = 0; j < subdiv; ++j) {
      const double tm = lo + (hi - lo) * (j + 0.5) / subdiv;
      const double frac = (tm - t[k]) / (t[k + 1] - t[k]);
      acc += (sg.mag(fi, k) + frac * (sg.mag(fi, k + 1) - sg.mag(fi, k))) *
             (hi - lo) / subdiv;
    }
  }
  return acc;
}

void criterion_quadrature_equivalence() {
  bool ok = true;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    cwt::Scalogram sg;
    sg.center_freq_hz = 100.0;
    const std::size_t nf = 20, nt = 257;
    sg.freqs_hz.resize(nf);
    for (std::size_t i = 0; i < nf; ++i)
      sg.freqs_hz[i] = 480.0 * std::pow(2.0, -static_cast<double>(i) / 8.0);
    sg.times_s.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) sg.times_s[k] = k / 100.0;
    sg.coeffs_mag.resize(nf * nt);
    Rng rng(seed);
    for (double& v : sg.coeffs_mag) v = std::abs(rng.normal()) + 0.01;

    features::ExcavationWindow w{0.34, 2.21, features::EndReason::bucket_extension};
    const double mass = 2.3;
    const double norm = 1.0 / (mass * w.duration_s());

    std::vector<double> oracle(nf);
    for (std::size_t i = 0; i < nf; ++i)
      oracle[i] = riemann_row_integral(sg, i, w.alpha1_s, w.alpha2_s) * norm;
    const double beta_oracle = *std::max_element(oracle.begin(), oracle.end());
    double zeta_oracle = 0.0;
    for (std::size_t i = 0; i + 1 < nf; ++i)
      zeta_oracle +=
          0.5 * (oracle[i] + oracle[i + 1]) * (sg.freqs_hz[i] - sg.freqs_hz[i + 1]);

    const double beta_impl = features::beta(sg, w, mass).value;
    const double zeta_impl =
        features::zeta(sg, w, mass, sg.freqs_hz.back(), sg.freqs_hz.front(), 0.1)
            .value;
    const double eb = std::abs(beta_impl / beta_oracle - 1.0);
    const double ez = std::abs(zeta_impl / zeta_oracle - 1.0);
    worst = std::max({worst, eb, ez});
    if (eb > 1e-6 || ez > 1e-6) ok = false;
  }
  std::ostringstream note;
  note << "worst relative error " << worst << " over 10 random scalograms";
  result("C5", ok, "beta/zeta equal the brute-force quadrature | " + note.str());
}

// ------------------------------------------------------------- C6, C7, C9

simulate::RockPileSpec narrow_pile(double xc, const std::string& label) {
  simulate::RockPileSpec p;
  p.model = {3.0, xc};
  p.d_min_mm = 0.75 * xc;
  p.d_max_mm = 1.6 * xc;
  p.label = label;
  return p;
}

double pipeline_zeta(const TrialRecord& trial) {
  const auto rows = features::extract_features(trial, features::Source::bucket_imu);
  for (const auto& r : rows)
    if (r.kind == "zeta") return r.value;
  throw std::runtime_error("no zeta row");
}

double trial_zeta(const simulate::RockPileSpec& pile, double mass,
                  std::uint64_t pop_seed, std::uint64_t synth_seed) {
  const auto pop = simulate::sample_population(pile, mass, pop_seed);
  simulate::TrialSynthesisConfig cfg;
  cfg.seed = synth_seed;
  return pipeline_zeta(simulate::synthesize_trial(pop, cfg));
}

void criterion_oracle_ratio() {
  const auto base = narrow_pile(20.0, "base");
  const double base_mass = simulate::preset_target_mass_kg(base, 100);
  bool ok = true;
  std::ostringstream note;
  for (double lam : {0.5, 2.0, 4.0}) {
    const auto other = narrow_pile(20.0 * lam, "other");
    const double other_mass = simulate::preset_target_mass_kg(other, 100);
    int inside = 0;
    for (int s = 0; s < 20; ++s) {
      const auto pa = simulate::sample_population(base, base_mass, 1000 + s);
      const auto pb = simulate::sample_population(other, other_mass, 2000 + s);
      simulate::TrialSynthesisConfig ca, cb;
      ca.seed = 3000 + s;
      cb.seed = 4000 + s;
      const double za = pipeline_zeta(simulate::synthesize_trial(pa, ca));
      const double zb = pipeline_zeta(simulate::synthesize_trial(pb, cb));
      const double truth =
          simulate::population_stats(pb).d_bar_mm / simulate::population_stats(pa).d_bar_mm;
      const double rel = (zb / za) / truth;
      if (rel >= 0.75 && rel <= 1.25) ++inside;
    }
    if (inside < 18) ok = false;
    note << "x" << lam << ":" << inside << "/20 ";
  }
  result("C6", ok, "pipeline zeta ratio within 25% of true size ratio | " + note.str());
}

void criterion_monotone_ranking() {
  const auto piles = simulate::paper_pile_presets();
  std::vector<double> medians;
  std::ostringstream note;
  for (std::size_t pi = 0; pi < piles.size(); ++pi) {
    const double mass = simulate::preset_target_mass_kg(piles[pi], 130);
    std::vector<double> zs;
    for (int s = 0; s < 20; ++s) {
      zs.push_back(trial_zeta(piles[pi], mass, 7000 + 100 * pi + s,
                              8000 + 100 * pi + s));
    }
    std::sort(zs.begin(), zs.end());
    medians.push_back(0.5 * (zs[9] + zs[10]));
    note << piles[pi].label << ":" << medians.back() << " ";
  }
  bool ok = true;  // rank correlation is exactly 1 iff strictly increasing
  for (std::size_t i = 1; i < medians.size(); ++i)
    if (!(medians[i] > medians[i - 1])) ok = false;
  result("C7", ok, "median zeta strictly increases with pile mean size | " + note.str());
}

void criterion_classification() {
  const auto ref_pile = narrow_pile(30.0, "ref");
  const auto big_pile = narrow_pile(75.0, "big");  // true ratio 2.5
  const double ref_mass = simulate::preset_target_mass_kg(ref_pile, 150);
  const double big_mass = simulate::preset_target_mass_kg(big_pile, 150);

  std::vector<features::FeatureRow> cal_rows;
  for (int s = 0; s < 40; ++s) {
    features::FeatureRow r;
    r.trial_id = "cal" + std::to_string(s);
    r.pile_label = "ref";
    r.operator_id = "A";
    r.source = "bucket/2";
    r.epoch = 2;
    r.kind = "zeta";
    r.value = trial_zeta(ref_pile, ref_mass, 11000 + s, 12000 + s);
    cal_rows.push_back(r);
  }
  const auto cal =
      relative::calibrate(cal_rows, relative::Scope{"bucket/2", {}}, "ref");

  int larger = 0;
  for (int s = 0; s < 20; ++s) {
    const double z = trial_zeta(big_pile, big_mass, 13000 + s, 14000 + s);
    if (relative::classify(z, cal, relative::PBound::p90) ==
        relative::SizeClass::larger)
      ++larger;
  }
  int indist = 0;
  for (int s = 0; s < 20; ++s) {
    const double z = trial_zeta(ref_pile, ref_mass, 15000 + s, 16000 + s);
    if (relative::classify(z, cal, relative::PBound::p90) ==
        relative::SizeClass::indistinguishable)
      ++indist;
  }
  std::ostringstream note;
  note << "ratio-2.5 larger " << larger << "/20, self indistinguishable " << indist
       << "/20 at z0.90";
  result("C9", larger == 20 && indist >= 17, "z-rule classification | " + note.str());
}

// --------------------------------------------------------------------- C8

void criterion_window_detection() {
  const auto pile = narrow_pile(25.0, "win");
  const double mass = simulate::preset_target_mass_kg(pile, 120);
  int within = 0, n_ext = 0, n_cap = 0;
  const int runs = 100;
  for (int s = 0; s < runs; ++s) {
    const auto pop = simulate::sample_population(pile, mass, 20000 + s);
    simulate::TrialSynthesisConfig cfg;
    cfg.seed = 21000 + s;
    cfg.slow_ramp = (s % 5 == 4);  // a fifth of the trials exercise the cap
    if (cfg.slow_ramp) cfg.duration_s = 16.0;
    const auto trial = simulate::synthesize_trial(pop, cfg);
    const auto w =
        features::detect_window(trial, features::DetectorConfig::bucket());
    if (std::abs(w.alpha1_s - cfg.onset_s) <= 0.05) ++within;
    if (cfg.slow_ramp) {
      if (w.end_reason == features::EndReason::time_cap &&
          std::abs(w.duration_s() - 11.0) < 1e-6)
        ++n_cap;
    } else if (w.end_reason == features::EndReason::bucket_extension) {
      ++n_ext;
    }
  }
  std::ostringstream note;
  note << within << "/100 onsets within 50 ms, " << n_ext << " extension ends, "
       << n_cap << " capped ends";
  result("C8", within >= 95 && n_ext == 80 && n_cap == 20,
         "window detection and end-condition labels | " + note.str());
}

// -------------------------------------------------------------------- C10

void criterion_filter_contract() {
  using telemetry::highpass;
  bool ok = true;
  std::ostringstream note;

  Channel dc;
  dc.name = "dc";
  dc.rate_hz = 1000.0;
  dc.samples.assign(4000, 9.81);
  double peak = 0.0;
  for (double v : highpass(dc, 2.0).samples) peak = std::max(peak, std::abs(v));
  const double dc_db = 20.0 * std::log10(peak / 9.81);
  if (!(dc_db <= -40.0)) ok = false;
  note << "DC:" << dc_db << "dB ";

  Channel tone;
  tone.name = "tone";
  tone.rate_hz = 1000.0;
  tone.samples.resize(8000);
  for (std::size_t i = 0; i < tone.samples.size(); ++i)
    tone.samples[i] = std::sin(2.0 * M_PI * 10.0 * i / 1000.0);
  const auto filtered = highpass(tone, 2.0);
  double acc = 0.0;
  for (std::size_t i = 2000; i < 6000; ++i)
    acc += filtered.samples[i] * filtered.samples[i];
  const double amp = std::sqrt(2.0 * acc / 4000.0);
  const double amp_db = 20.0 * std::log10(amp);
  if (!(std::abs(amp_db) <= 1.0)) ok = false;
  note << "10Hz:" << amp_db << "dB ";

  // zero phase: cross-correlation of input and output peaks at lag 0
  long best_lag = -999;
  double best = -1e300;
  for (long lag = -20; lag <= 20; ++lag) {
    double c = 0.0;
    for (std::size_t i = 2000; i < 6000; ++i)
      c += tone.samples[i] * filtered.samples[static_cast<std::size_t>(
               static_cast<long>(i) + lag)];
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  if (best_lag != 0) ok = false;
  note << "xcorr-peak-lag:" << best_lag;
  result("C10", ok, "high-pass filter contract | " + note.str());
}

// -------------------------------------------------------------------- C11

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism() {
  const fs::path base = fs::temp_directory_path() / "fragsense_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cli = FRAGSENSE_CLI_PATH;
  bool ok = true;
  std::ostringstream note;

  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };

  // identical commands, identical paths, run twice; snapshot in between
  const std::string trials = (base / "trials").string();
  const std::string feats = (base / "features").string();
  const char* watched[] = {"trials/ground_truth.json",
                           "trials/trial_0000.bucket_acc_z.csv",
                           "features/features.csv", "features/features.json"};
  std::map<std::string, std::string> snapshot;
  for (int round = 1; round <= 2 && ok; ++round) {
    if (!run("--seed 7 --out " + trials +
             " simulate --piles 0/90 --piles 0/150 --trials 3 --particles 80") ||
        !run("--out " + feats + " features --manifest-dir " + trials)) {
      ok = false;
      note << "CLI run failed ";
      break;
    }
    for (const char* rel : watched) {
      const auto content = slurp(base / rel);
      if (content.empty()) {
        ok = false;
        note << rel << " missing ";
      } else if (round == 1) {
        snapshot[rel] = content;
      } else if (snapshot[rel] != content) {
        ok = false;
        note << rel << " differs ";
      }
    }
  }
  if (ok) note << "simulate+features byte-identical across reruns";
  result("C11", ok, "deterministic outputs | " + note.str());
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n");
  criterion_rr_reproduction();
  criterion_eq6_consistency();
  criterion_sieve_ratios();
  criterion_tone_localization();
  criterion_quadrature_equivalence();
  criterion_oracle_ratio();
  criterion_monotone_ranking();
  criterion_window_detection();
  criterion_classification();
  criterion_filter_contract();
  criterion_determinism();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
