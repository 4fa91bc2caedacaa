// fragsense: relative rock-pile fragmentation estimation from excavation
// telemetry. Subcommands cover the full pipeline: simulate -> features ->
// calibrate -> estimate/classify -> report, plus Rosin-Rammler sieve fits.

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fragsense/features.hpp"
#include "fragsense/telemetry.hpp"
#include "fragsense/granulometry.hpp"
#include "fragsense/relative.hpp"
#include "fragsense/report.hpp"
#include "fragsense/simulate.hpp"
#include "fragsense/trial_io.hpp"

namespace fs = std::filesystem;
using namespace fragsense;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string source = "bucket";
};

report::Provenance make_provenance(const CLI::App& cmd, std::uint64_t seed) {
  report::Provenance prov;
  prov.seed = seed;
  std::string cfg_text;
  std::vector<std::string> overrides;
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_name().empty() || opt->get_name() == "--help") continue;
    std::ostringstream line;
    line << opt->get_name() << "=";
    for (const auto& r : opt->results()) line << r << ",";
    cfg_text += line.str() + "\n";
    if (opt->count() > 0) overrides.push_back(line.str());
  }
  prov.config_digest = report::hex64(report::fnv1a(cfg_text.data(), cfg_text.size()));
  prov.overrides = overrides;
  return prov;
}

int cmd_simulate(const GlobalOpts& g, const std::string& preset,
                 const std::vector<std::string>& pile_filter, int trials,
                 int particles, const std::string& operator_id,
                 double slow_ramp_frac) {
  if (preset != "paper-five-piles")
    throw config_error("unknown preset '" + preset + "'");
  simulate::CampaignConfig cc;
  cc.piles = simulate::paper_pile_presets();
  if (!pile_filter.empty()) {
    std::vector<simulate::RockPileSpec> keep;
    for (const auto& p : cc.piles)
      for (const auto& want : pile_filter)
        if (p.label == want) keep.push_back(p);
    if (keep.empty()) throw config_error("pile filter matched no presets");
    cc.piles = keep;
  }
  cc.trials_per_pile = trials;
  cc.particles_per_trial = static_cast<std::size_t>(particles);
  cc.operator_id = operator_id;
  cc.seed = g.seed;
  cc.slow_ramp_fraction = slow_ramp_frac;
  const auto campaign = simulate::run_campaign(cc);
  trial_io::save_campaign(campaign, g.out_dir);
  std::printf("wrote %zu trials (%zu piles) to %s\n", campaign.size(),
              cc.piles.size(), g.out_dir.c_str());
  return 0;
}

int cmd_features(const GlobalOpts& g, const std::string& manifest_dir,
                 const features::PipelineConfig& pcfg, bool emit_beta,
                 const std::string& scalogram_trial, const CLI::App& cmd) {
  const auto manifests = trial_io::find_manifests(manifest_dir);
  if (manifests.empty()) {
    std::fprintf(stderr, "error: no trials found under %s\n", manifest_dir.c_str());
    return 2;
  }
  const features::Source source = features::parse_source(g.source);

  std::vector<features::FeatureRow> rows;
  std::vector<std::string> failures;
  // Trials are independent; extraction is deterministic per trial and the
  // output ordering is canonicalized afterwards.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    std::vector<features::FeatureRow> local;
    std::string failure;
    try {
      const TrialRecord trial = trial_io::load_trial(manifests[i]);
      for (auto& r : features::extract_features(trial, source, pcfg))
        if (emit_beta || r.kind == "zeta") local.push_back(std::move(r));
      if (!scalogram_trial.empty() && trial.trial_id == scalogram_trial) {
        const auto& det = source == features::Source::boom_imu
                              ? pcfg.boom_detector
                              : pcfg.bucket_detector;
        const auto w = features::detect_window(trial, det);
        const double cutoff = source == features::Source::bucket_imu
                                  ? pcfg.cutoff_bucket_hz
                                  : pcfg.cutoff_boom_hz;
        const Channel filtered =
            telemetry::highpass(trial.channel(det.accel_channel()), cutoff);
        const auto sg = cwt::transform(filtered, w.alpha1_s, w.alpha2_s,
                                       pcfg.wavelet, pcfg.exec);
        fs::create_directories(g.out_dir);
        cwt::write_scalogram_csv(
            sg, (fs::path(g.out_dir) /
                 ("scalogram_" + trial.trial_id + "_" + g.source + ".csv"))
                    .string());
      }
    } catch (const std::exception& e) {
      failure = manifests[i] + ": " + e.what();
    }
#pragma omp critical
    {
      rows.insert(rows.end(), local.begin(), local.end());
      if (!failure.empty()) failures.push_back(failure);
    }
  }

  for (const auto& f : failures)
    std::fprintf(stderr, "warning: trial skipped: %s\n", f.c_str());
  if (rows.empty()) {
    std::fprintf(stderr, "error: every trial failed feature extraction\n");
    return 2;
  }

  fs::create_directories(g.out_dir);
  report::Provenance prov = make_provenance(cmd, g.seed);
  // keyed by filename so identical inputs give identical reports anywhere
  for (const auto& m : manifests)
    prov.inputs[fs::path(m).filename().string()] =
        report::hex64(report::fnv1a_file(m));
  report::write_feature_csv(rows, (fs::path(g.out_dir) / "features.csv").string());
  report::write_feature_json(rows, (fs::path(g.out_dir) / "features.json").string(),
                             prov);
  std::printf("wrote %zu feature rows (%zu trials, %zu skipped) to %s\n",
              rows.size(), manifests.size() - failures.size(), failures.size(),
              g.out_dir.c_str());
  return failures.empty() ? 0 : 0;  // skipped trials are reported, not fatal
}

int cmd_fit_rr(const GlobalOpts& g, const std::string& sieve_path,
               const std::string& pile, const granulometry::FitOptions& opts,
               const CLI::App& cmd) {
  const auto table = granulometry::load_sieve_csv(sieve_path, pile);
  const auto model = granulometry::fit_rr(table, opts);
  const double xbar = granulometry::rr_mean(model);
  std::printf("n = %.4f\nx_c = %.4g mm\nxbar = %.4g mm\n", model.n, model.x_c_mm,
              xbar);
  fs::create_directories(g.out_dir);
  const std::string path = (fs::path(g.out_dir) / "rr_model.json").string();
  std::ofstream out(path);
  report::Provenance prov = make_provenance(cmd, g.seed);
  out << "{\n  \"schema_version\": " << report::kSchemaVersion
      << ",\n  \"pile_label\": \"" << pile << "\",\n  \"n\": " << model.n
      << ",\n  \"x_c_mm\": " << model.x_c_mm << ",\n  \"xbar_mm\": " << xbar
      << ",\n  \"config_digest\": \"" << prov.config_digest << "\"\n}\n";
  return 0;
}

relative::Scope scope_from_flags(const std::string& source_tag,
                                 const std::string& operator_id) {
  relative::Scope scope;
  scope.source = source_tag;
  if (!operator_id.empty()) scope.operator_id = operator_id;
  return scope;
}

// The feature report stores sources as "<source>/<epoch>". A bare source
// name widens to the report's single epoch if unambiguous.
std::string resolve_source_tag(const std::vector<features::FeatureRow>& rows,
                               const std::string& requested) {
  if (requested.find('/') != std::string::npos) return requested;
  std::string found;
  for (const auto& r : rows) {
    if (r.source.rfind(requested + "/", 0) == 0) {
      if (!found.empty() && found != r.source)
        throw config_error("source '" + requested +
                           "' is ambiguous across epochs; pass e.g. " + found);
      found = r.source;
    }
  }
  if (found.empty())
    throw config_error("source '" + requested + "' not present in the report");
  return found;
}

int cmd_calibrate(const GlobalOpts& g, const std::string& features_path,
                  const std::string& pile, const std::string& operator_id,
                  double xbar_ref, const CLI::App& cmd) {
  auto rows = report::read_feature_json(features_path);
  const auto scope = scope_from_flags(resolve_source_tag(rows, g.source), operator_id);
  auto cal = relative::calibrate(rows, scope, pile);
  if (xbar_ref > 0.0) cal.xbar_ref_mm = xbar_ref;
  fs::create_directories(g.out_dir);
  report::Provenance prov = make_provenance(cmd, g.seed);
  prov.inputs[features_path] = report::hex64(report::fnv1a_file(features_path));
  report::write_calibration_json(
      cal, (fs::path(g.out_dir) / "calibration.json").string(), prov);
  std::printf("calibration: pile %s scope %s mu = %.6g sigma = %.6g n = %d\n",
              cal.pile_label.c_str(), cal.scope.str().c_str(), cal.mu_ref,
              cal.sigma_ref, cal.n_trials);
  return 0;
}

int cmd_estimate(const GlobalOpts& g, const std::string& features_path,
                 const std::string& reference_pile, const std::string& operator_id,
                 double xbar_ref, const CLI::App& cmd) {
  auto rows = report::read_feature_json(features_path);
  const auto scope = scope_from_flags(resolve_source_tag(rows, g.source), operator_id);
  auto cal = relative::calibrate(rows, scope, reference_pile);
  if (xbar_ref > 0.0) cal.xbar_ref_mm = xbar_ref;

  std::vector<features::FeatureRow> in_scope;
  for (const auto& r : rows)
    if (r.kind == "zeta" && scope.matches(r)) in_scope.push_back(r);
  const auto summary = relative::summarize(in_scope, cal);

  fs::create_directories(g.out_dir);
  report::Provenance prov = make_provenance(cmd, g.seed);
  prov.inputs[features_path] = report::hex64(report::fnv1a_file(features_path));
  report::write_summary_json(cal, summary,
                             (fs::path(g.out_dir) / "summary.json").string(), prov);
  report::write_ratio_plot_csv(
      summary, (fs::path(g.out_dir) / "ratio_vs_pile.csv").string());
  for (const auto& s : summary) {
    std::printf("%-8s op=%-3s ratio = %.3f +/- %.3f (n=%d)%s\n",
                s.pile_label.c_str(), s.operator_id.c_str(), s.ratio_mean,
                s.ratio_std, s.n, s.pile_label == reference_pile ? " (ref)" : "");
  }
  return 0;
}

int cmd_estimate_sieve(const GlobalOpts& g, const std::string& sieve_dir,
                       const std::string& reference_pile, bool round_mm) {
  // Sieve-only mode: ratios of fitted mean sizes. Means are reported to the
  // millimetre (sieve-lab reporting convention) unless --no-round-mm.
  std::map<std::string, double> means;
  for (const auto& e : fs::directory_iterator(sieve_dir)) {
    if (e.path().extension() != ".csv") continue;
    std::string label = e.path().stem().string();
    for (char& c : label)
      if (c == '_') c = '/';
    const auto table = granulometry::load_sieve_csv(e.path().string(), label);
    const auto model = granulometry::fit_rr(table);
    double xbar = granulometry::rr_mean(model);
    if (round_mm) xbar = std::round(xbar);
    means[label] = xbar;
  }
  if (!means.count(reference_pile))
    throw config_error("reference pile '" + reference_pile +
                       "' has no sieve table in " + sieve_dir);
  const double ref = means.at(reference_pile);

  fs::create_directories(g.out_dir);
  const std::string path = (fs::path(g.out_dir) / "sieve_ratios.csv").string();
  std::ofstream out(path);
  out << "pile,xbar_mm,ratio\n";
  for (const auto& [label, xbar] : means) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g\n", label.c_str(), xbar,
                  xbar / ref);
    out << buf;
    std::printf("%-8s xbar = %6.4g mm  ratio = %.4g%s\n", label.c_str(), xbar,
                xbar / ref, label == reference_pile ? " (ref)" : "");
  }
  return 0;
}

int cmd_classify(const GlobalOpts& g, const std::string& features_path,
                 const std::string& calibration_path, const std::string& p_str) {
  const auto rows = report::read_feature_json(features_path);
  const auto cal = report::read_calibration_json(calibration_path);
  const auto p = relative::parse_p_bound(p_str);

  fs::create_directories(g.out_dir);
  const std::string path = (fs::path(g.out_dir) / "classes.csv").string();
  std::ofstream out(path);
  out << "trial_id,pile_label,operator,source,zeta,z,class\n";
  std::map<std::string, int> counts;
  for (const auto& r : report::sort_rows(rows)) {
    if (r.kind != "zeta" || r.source != cal.scope.source) continue;
    const auto cls = relative::classify(r.value, cal, p);
    const double z = (r.value - cal.mu_ref) / cal.sigma_ref;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%.12g,%.6g,%s\n",
                  r.trial_id.c_str(), r.pile_label.c_str(), r.operator_id.c_str(),
                  r.source.c_str(), r.value, z,
                  relative::size_class_name(cls).c_str());
    out << buf;
    counts[relative::size_class_name(cls)]++;
  }
  for (const auto& [name, n] : counts) std::printf("%s: %d\n", name.c_str(), n);
  return 0;
}

int cmd_report(const GlobalOpts& g, const std::string& manifest_dir,
               const std::string& reference_pile, const std::string& operator_id,
               double xbar_ref, const features::PipelineConfig& pcfg,
               const CLI::App& cmd) {
  // End-to-end: features -> calibration -> summary with class counts.
  const int rc = cmd_features(g, manifest_dir, pcfg, false, "", cmd);
  if (rc != 0) return rc;
  return cmd_estimate(g, (fs::path(g.out_dir) / "features.json").string(),
                      reference_pile, operator_id, xbar_ref, cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proprioceptive rock-pile fragmentation estimation"};
  app.require_subcommand(1);
  app.set_config("--config");

  GlobalOpts g;
  app.add_option("--seed", g.seed, "campaign seed");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--source", g.source, "signal source: bucket|boom|lift");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic campaign");
  std::string preset = "paper-five-piles";
  std::vector<std::string> pile_filter;
  int trials = 10, particles = 130;
  std::string operator_id = "A";
  double slow_ramp_frac = 0.0;
  sim->add_option("--preset", preset, "campaign preset");
  sim->add_option("--piles", pile_filter, "subset of preset pile labels");
  sim->add_option("--trials", trials, "trials per pile");
  sim->add_option("--particles", particles, "approximate particles per trial");
  sim->add_option("--operator", operator_id, "operator label");
  sim->add_option("--slow-ramp-frac", slow_ramp_frac,
                  "fraction of trials that never reach the end extension");

  // shared pipeline knobs
  features::PipelineConfig pcfg;
  std::string manifest_dir;
  auto add_pipeline_opts = [&](CLI::App* c) {
    c->add_option("--manifest-dir", manifest_dir, "directory of trial manifests")
        ->required();
    c->add_option("--cutoff-bucket", pcfg.cutoff_bucket_hz,
                  "high-pass cutoff for bucket IMU signals [Hz]");
    c->add_option("--cutoff-boom", pcfg.cutoff_boom_hz,
                  "high-pass cutoff for boom IMU / lift signals [Hz]");
    c->add_option("--jerk-bucket", pcfg.bucket_detector.jerk_threshold,
                  "bucket onset jerk threshold [m/s^3]");
    c->add_option("--jerk-boom", pcfg.boom_detector.jerk_threshold,
                  "boom onset jerk threshold [m/s^3]");
    c->add_option("--end-extension", pcfg.bucket_detector.end_extension_mm,
                  "bucket extension ending the window [mm]");
    c->add_option("--time-cap", pcfg.bucket_detector.time_cap_s,
                  "maximum window length [s]");
    c->add_option("--voices", pcfg.wavelet.voices_per_octave,
                  "CWT voices per octave");
    c->add_flag_callback(
        "--morlet", [&]() { pcfg.wavelet.family = cwt::WaveletFamily::morlet; },
        "use the Morlet wavelet instead of analytic Morse");
    c->add_flag_callback(
        "--serial", [&]() { pcfg.exec = cwt::Exec::serial; },
        "run the CWT single-threaded");
  };

  auto* feat = app.add_subcommand("features", "extract beta/zeta per trial");
  add_pipeline_opts(feat);
  bool emit_beta = false;
  std::string scalogram_trial;
  feat->add_flag("--emit-beta", emit_beta, "emit beta rows alongside zeta");
  feat->add_option("--export-scalogram", scalogram_trial,
                   "write the scalogram CSV of one trial id");

  // fit-rr
  auto* fit = app.add_subcommand("fit-rr", "fit a Rosin-Rammler model to sieve data");
  std::string sieve_path, pile_label;
  granulometry::FitOptions fit_opts;
  fit->add_option("--sieve", sieve_path, "sieve CSV (sieve_mm,passing_pct)")
      ->required();
  fit->add_option("--pile", pile_label, "pile label for the output");
  fit->add_option("--p-lo", fit_opts.p_lo, "lower passing-fraction constraint");
  fit->add_option("--p-hi-min", fit_opts.p_hi_min, "upper constraint band start");
  fit->add_option("--p-hi-max", fit_opts.p_hi_max, "upper constraint band end");
  fit->add_flag("--refine", fit_opts.nonlinear_refine,
                "Levenberg refinement on the raw residuals");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "reference-pile calibration");
  std::string features_path, cal_pile, cal_operator;
  double xbar_ref = 0.0;
  cal->add_option("--features", features_path, "feature report JSON")->required();
  cal->add_option("--pile", cal_pile, "reference pile label")->required();
  cal->add_option("--operator", cal_operator, "restrict scope to one operator");
  cal->add_option("--xbar-ref", xbar_ref, "known reference mean size [mm]");

  // estimate
  auto* est = app.add_subcommand("estimate", "relative size ratios vs a reference");
  std::string est_features, est_ref_pile, est_operator, sieve_dir;
  double est_xbar_ref = 0.0;
  bool no_round_mm = false;
  est->add_option("--features", est_features, "feature report JSON");
  est->add_option("--reference-pile", est_ref_pile, "reference pile label")
      ->required();
  est->add_option("--operator", est_operator, "restrict scope to one operator");
  est->add_option("--xbar-ref", est_xbar_ref, "known reference mean size [mm]");
  est->add_option("--sieve-dir", sieve_dir,
                  "sieve-only mode: directory of <pile>.csv sieve tables");
  est->add_flag("--no-round-mm", no_round_mm,
                "sieve-only mode: keep full-precision mean sizes");

  // classify
  auto* cls = app.add_subcommand("classify", "smaller/larger vs a calibration");
  std::string cls_features, cls_calibration, cls_p = "0.90";
  cls->add_option("--features", cls_features, "feature report JSON")->required();
  cls->add_option("--calibration", cls_calibration, "calibration JSON")->required();
  cls->add_option("--p", cls_p, "probability bound: 0.90|0.95|0.99");

  // report
  auto* rep = app.add_subcommand("report", "features + estimate in one pass");
  std::string rep_ref_pile, rep_operator;
  double rep_xbar_ref = 0.0;
  add_pipeline_opts(rep);
  rep->add_option("--reference-pile", rep_ref_pile, "reference pile label")
      ->required();
  rep->add_option("--operator", rep_operator, "restrict scope to one operator");
  rep->add_option("--xbar-ref", rep_xbar_ref, "known reference mean size [mm]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(g, preset, pile_filter, trials, particles, operator_id,
                          slow_ramp_frac);
    if (feat->parsed())
      return cmd_features(g, manifest_dir, pcfg, emit_beta, scalogram_trial, *feat);
    if (fit->parsed()) return cmd_fit_rr(g, sieve_path, pile_label, fit_opts, *fit);
    if (cal->parsed())
      return cmd_calibrate(g, features_path, cal_pile, cal_operator, xbar_ref, *cal);
    if (est->parsed()) {
      if (!sieve_dir.empty())
        return cmd_estimate_sieve(g, sieve_dir, est_ref_pile, !no_round_mm);
      if (est_features.empty())
        throw config_error("estimate needs --features or --sieve-dir");
      return cmd_estimate(g, est_features, est_ref_pile, est_operator, est_xbar_ref,
                          *est);
    }
    if (cls->parsed()) return cmd_classify(g, cls_features, cls_calibration, cls_p);
    if (rep->parsed())
      return cmd_report(g, manifest_dir, rep_ref_pile, rep_operator, rep_xbar_ref,
                        pcfg, *rep);
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 1;
}
