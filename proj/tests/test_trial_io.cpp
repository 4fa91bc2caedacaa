#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fragsense/report.hpp"
#include "fragsense/simulate.hpp"
#include "fragsense/trial_io.hpp"

using namespace fragsense;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / "fragsense_io" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrialRecord small_trial() {
  simulate::RockPileSpec pile;
  pile.model = {3.0, 20.0};
  pile.d_min_mm = 15.0;
  pile.d_max_mm = 32.0;
  pile.label = "0/90";
  const auto pop = simulate::sample_population(pile, 0.5, 3);
  simulate::TrialSynthesisConfig cfg;
  cfg.seed = 8;
  cfg.duration_s = 6.0;
  cfg.dig_duration_s = 2.5;
  cfg.collision_span_s = 1.5;
  cfg.onset_s = 1.0;
  auto t = simulate::synthesize_trial(pop, cfg);
  t.trial_id = "t0001";
  t.pile_label = "0/90";
  t.operator_id = "A";
  t.day = 2;
  return t;
}

}  // namespace

TEST_CASE("trial round-trips exactly through CSV + manifest") {
  const auto dir = fresh_dir("roundtrip");
  const auto t = small_trial();
  trial_io::save_trial(t, dir.string(), "t0001.manifest.json");
  const auto back = trial_io::load_trial((dir / "t0001.manifest.json").string());

  CHECK(back.trial_id == t.trial_id);
  CHECK(back.pile_label == t.pile_label);
  CHECK(back.operator_id == t.operator_id);
  CHECK(back.day == t.day);
  CHECK(*back.payload_mass_kg == *t.payload_mass_kg);
  REQUIRE(back.channels.size() == t.channels.size());
  for (const auto& [name, ch] : t.channels) {
    const auto& b = back.channel(name);
    CHECK(b.rate_hz == ch.rate_hz);
    CHECK(b.samples == ch.samples);  // %.17g keeps doubles exact
  }
}

TEST_CASE("wide-format channel files load per declared column") {
  const auto dir = fresh_dir("wide");
  {
    std::ofstream csv(dir / "imu.csv");
    csv << "t_s,bucket_acc_z,boom_acc_x\n";
    for (int i = 0; i < 64; ++i)
      csv << i / 100.0 << "," << 0.1 * i << "," << -0.2 * i << "\n";
    std::ofstream ext(dir / "ext.csv");
    ext << "t_s,value\n";
    for (int i = 0; i < 16; ++i) ext << i / 25.0 << "," << 30.0 + i << "\n";
    std::ofstream man(dir / "w.manifest.json");
    man << R"({"trial_id":"w","pile_label":"0/32","operator":"B","day":1,
      "payload_mass_kg": 3.5,
      "channels":[
        {"name":"bucket_acc_z","file":"imu.csv","rate_hz":100,"units":"m/s^2"},
        {"name":"boom_acc_x","file":"imu.csv","rate_hz":100,"units":"m/s^2"},
        {"name":"d_bucket","file":"ext.csv","rate_hz":25,"units":"mm"}]})";
  }
  const auto t = trial_io::load_trial((dir / "w.manifest.json").string());
  CHECK(t.channel("bucket_acc_z").samples[5] == doctest::Approx(0.5));
  CHECK(t.channel("boom_acc_x").samples[5] == doctest::Approx(-1.0));
  CHECK(t.channel("d_bucket").rate_hz == 25.0);
  CHECK(t.bucket_imu_epoch() == 1);
}

TEST_CASE("non-numeric cells report their line number") {
  const auto dir = fresh_dir("badcell");
  {
    std::ofstream csv(dir / "ch.csv");
    csv << "t_s,value\n";
    for (int i = 2; i <= 16; ++i)
      csv << (i == 16 ? "0.15,oops\n" : std::to_string(i / 100.0) + ",1.0\n");
    std::ofstream man(dir / "b.manifest.json");
    man << R"({"trial_id":"b","pile_label":"x","operator":"A","day":1,
      "channels":[{"name":"speed","file":"ch.csv","rate_hz":100,"units":"m/s"}]})";
  }
  try {
    trial_io::load_trial((dir / "b.manifest.json").string());
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line_number == 16);
  }
}

TEST_CASE("manifest declaring a channel missing from the file is a schema error") {
  const auto dir = fresh_dir("missing");
  {
    std::ofstream csv(dir / "imu.csv");
    csv << "t_s,bucket_acc_z\n0,0\n0.001,0\n";
    std::ofstream man(dir / "m.manifest.json");
    man << R"({"trial_id":"m","pile_label":"x","operator":"A","day":1,
      "channels":[{"name":"boom_acc_x","file":"imu.csv","rate_hz":1000,"units":"m/s^2"}]})";
  }
  CHECK_THROWS_AS(trial_io::load_trial((dir / "m.manifest.json").string()),
                  schema_error);
}

TEST_CASE("unregistered channel names are rejected") {
  const auto dir = fresh_dir("unregistered");
  {
    std::ofstream csv(dir / "ch.csv");
    csv << "t_s,value\n0,0\n";
    std::ofstream man(dir / "u.manifest.json");
    man << R"({"trial_id":"u","pile_label":"x","operator":"A","day":1,
      "channels":[{"name":"chassis_acc","file":"ch.csv","rate_hz":10,"units":""}]})";
  }
  CHECK_THROWS_AS(trial_io::load_trial((dir / "u.manifest.json").string()),
                  schema_error);
}

TEST_CASE("campaign save emits manifests plus a ground-truth sidecar") {
  const auto dir = fresh_dir("campaign");
  simulate::CampaignConfig cc;
  simulate::RockPileSpec pile;
  pile.model = {3.0, 20.0};
  pile.d_min_mm = 15.0;
  pile.d_max_mm = 32.0;
  pile.label = "0/90";
  cc.piles = {pile};
  cc.trials_per_pile = 2;
  cc.particles_per_trial = 40;
  cc.seed = 4;
  const auto trials = simulate::run_campaign(cc);
  trial_io::save_campaign(trials, dir.string());

  const auto manifests = trial_io::find_manifests(dir.string());
  CHECK(manifests.size() == 2);
  CHECK(fs::exists(dir / "ground_truth.json"));
  const auto back = trial_io::load_trial(manifests.front());
  CHECK(back.pile_label == "0/90");
  CHECK(back.channels.size() == 11);
}

TEST_CASE("fnv1a digests are stable") {
  const char* text = "fragsense";
  const auto h1 = report::fnv1a(text, 9);
  const auto h2 = report::fnv1a(text, 9);
  CHECK(h1 == h2);
  CHECK(report::hex64(h1).size() == 16);
  CHECK(h1 != report::fnv1a("fragsensf", 9));
}

TEST_CASE("feature report JSON round-trips") {
  const auto dir = fresh_dir("report");
  features::FeatureRow r;
  r.trial_id = "t1";
  r.pile_label = "0/90";
  r.operator_id = "A";
  r.source = "bucket/2";
  r.epoch = 2;
  r.kind = "zeta";
  r.value = 123.456789;
  r.alpha1_s = 3.0;
  r.alpha2_s = 10.4;
  r.end_reason = "bucket_extension";
  r.f_min_hz = 4.0;
  r.f_max_hz = 500.0;
  report::Provenance prov;
  prov.seed = 7;
  const auto path = (dir / "features.json").string();
  report::write_feature_json({r}, path, prov);
  const auto rows = report::read_feature_json(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].value == r.value);
  CHECK(rows[0].source == "bucket/2");
  CHECK(rows[0].end_reason == "bucket_extension");
}
