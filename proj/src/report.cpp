#include "fragsense/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>

using ordered_json = nlohmann::ordered_json;

namespace fragsense::report {

std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path + " for digest");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<features::FeatureRow> sort_rows(std::vector<features::FeatureRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const features::FeatureRow& a, const features::FeatureRow& b) {
              if (a.trial_id != b.trial_id) return a.trial_id < b.trial_id;
              if (a.source != b.source) return a.source < b.source;
              return a.kind < b.kind;
            });
  return rows;
}

namespace {

ordered_json provenance_json(const Provenance& prov) {
  ordered_json p;
  p["tool_version"] = kToolVersion;
  p["config_digest"] = prov.config_digest;
  ordered_json inputs = ordered_json::object();
  for (const auto& [k, v] : prov.inputs) inputs[k] = v;
  p["input_digests"] = inputs;
  p["overrides"] = prov.overrides;
  p["seed"] = prov.seed;
  return p;
}

ordered_json row_json(const features::FeatureRow& r) {
  ordered_json j;
  j["trial_id"] = r.trial_id;
  j["pile_label"] = r.pile_label;
  j["operator"] = r.operator_id;
  j["source"] = r.source;
  j["epoch"] = r.epoch;
  j["kind"] = r.kind;
  j["value"] = r.value;
  j["alpha1_s"] = r.alpha1_s;
  j["alpha2_s"] = r.alpha2_s;
  j["end_reason"] = r.end_reason;
  j["f_min_hz"] = r.f_min_hz;
  j["f_max_hz"] = r.f_max_hz;
  return j;
}

features::FeatureRow row_from_json(const ordered_json& j) {
  features::FeatureRow r;
  r.trial_id = j.at("trial_id").get<std::string>();
  r.pile_label = j.at("pile_label").get<std::string>();
  r.operator_id = j.at("operator").get<std::string>();
  r.source = j.at("source").get<std::string>();
  r.epoch = j.at("epoch").get<int>();
  r.kind = j.at("kind").get<std::string>();
  r.value = j.at("value").get<double>();
  r.alpha1_s = j.at("alpha1_s").get<double>();
  r.alpha2_s = j.at("alpha2_s").get<double>();
  r.end_reason = j.at("end_reason").get<std::string>();
  r.f_min_hz = j.at("f_min_hz").get<double>();
  r.f_max_hz = j.at("f_max_hz").get<double>();
  return r;
}

}  // namespace

void write_feature_csv(const std::vector<features::FeatureRow>& rows,
                       const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"),
                                                    &std::fclose);
  if (!f) throw config_error("cannot write " + path);
  std::fprintf(f.get(),
               "trial_id,pile_label,operator,source,epoch,kind,value,"
               "alpha1_s,alpha2_s,end_reason,f_min_hz,f_max_hz\n");
  for (const auto& r : sort_rows(rows)) {
    std::fprintf(f.get(), "%s,%s,%s,%s,%d,%s,%.12g,%.9g,%.9g,%s,%.9g,%.9g\n",
                 r.trial_id.c_str(), r.pile_label.c_str(), r.operator_id.c_str(),
                 r.source.c_str(), r.epoch, r.kind.c_str(), r.value, r.alpha1_s,
                 r.alpha2_s, r.end_reason.c_str(), r.f_min_hz, r.f_max_hz);
  }
}

void write_feature_json(const std::vector<features::FeatureRow>& rows,
                        const std::string& path, const Provenance& prov) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["provenance"] = provenance_json(prov);
  j["rows"] = ordered_json::array();
  for (const auto& r : sort_rows(rows)) j["rows"].push_back(row_json(r));
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<features::FeatureRow> read_feature_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open feature report " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw schema_error("feature report " + path + ": " + e.what());
  }
  std::vector<features::FeatureRow> rows;
  try {
    for (const auto& rj : j.at("rows")) rows.push_back(row_from_json(rj));
  } catch (const ordered_json::exception& e) {
    throw schema_error("feature report " + path + ": " + e.what());
  }
  return rows;
}

void write_calibration_json(const relative::ReferenceCalibration& cal,
                            const std::string& path, const Provenance& prov) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["provenance"] = provenance_json(prov);
  j["pile_label"] = cal.pile_label;
  j["source"] = cal.scope.source;
  if (cal.scope.operator_id) j["operator"] = *cal.scope.operator_id;
  j["mu_ref"] = cal.mu_ref;
  j["sigma_ref"] = cal.sigma_ref;
  j["n_trials"] = cal.n_trials;
  if (cal.xbar_ref_mm) j["xbar_ref_mm"] = *cal.xbar_ref_mm;
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

relative::ReferenceCalibration read_calibration_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open calibration " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw schema_error("calibration " + path + ": " + e.what());
  }
  relative::ReferenceCalibration cal;
  try {
    cal.pile_label = j.at("pile_label").get<std::string>();
    cal.scope.source = j.at("source").get<std::string>();
    if (j.contains("operator")) cal.scope.operator_id = j["operator"].get<std::string>();
    cal.mu_ref = j.at("mu_ref").get<double>();
    cal.sigma_ref = j.at("sigma_ref").get<double>();
    cal.n_trials = j.at("n_trials").get<int>();
    if (j.contains("xbar_ref_mm")) cal.xbar_ref_mm = j["xbar_ref_mm"].get<double>();
  } catch (const ordered_json::exception& e) {
    throw schema_error("calibration " + path + ": " + e.what());
  }
  return cal;
}

void write_summary_json(const relative::ReferenceCalibration& ref,
                        const std::vector<relative::SummaryRow>& rows,
                        const std::string& path, const Provenance& prov) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["provenance"] = provenance_json(prov);
  ordered_json rj;
  rj["pile"] = ref.pile_label;
  rj["source"] = ref.scope.source;
  if (ref.scope.operator_id) rj["operator"] = *ref.scope.operator_id;
  rj["mu"] = ref.mu_ref;
  rj["sigma"] = ref.sigma_ref;
  rj["n"] = ref.n_trials;
  if (ref.xbar_ref_mm) rj["xbar_mm"] = *ref.xbar_ref_mm;
  j["reference"] = rj;
  j["rows"] = ordered_json::array();
  for (const auto& s : rows) {
    ordered_json sj;
    sj["pile"] = s.pile_label;
    sj["operator"] = s.operator_id;
    sj["source"] = s.source;
    sj["ratio_mean"] = s.ratio_mean;
    sj["ratio_std"] = s.ratio_std;
    sj["ratio_se"] = s.ratio_se;
    sj["n"] = s.n;
    if (s.xbar_est_mm) sj["xbar_est_mm"] = *s.xbar_est_mm;
    if (s.cross_operator) sj["cross_operator"] = true;
    if (!s.class_counts.empty()) {
      ordered_json cc = ordered_json::object();
      for (const auto& [bound, counts] : s.class_counts) {
        ordered_json b;
        b["smaller"] = counts.smaller;
        b["indistinguishable"] = counts.indistinguishable;
        b["larger"] = counts.larger;
        cc[bound] = b;
      }
      sj["class_counts"] = cc;
    }
    j["rows"].push_back(sj);
  }
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_ratio_plot_csv(const std::vector<relative::SummaryRow>& rows,
                          const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"),
                                                    &std::fclose);
  if (!f) throw config_error("cannot write " + path);
  std::fprintf(f.get(), "pile,operator,source,ratio_mean,ratio_std,n\n");
  for (const auto& s : rows) {
    std::fprintf(f.get(), "%s,%s,%s,%.9g,%.9g,%d\n", s.pile_label.c_str(),
                 s.operator_id.c_str(), s.source.c_str(), s.ratio_mean, s.ratio_std,
                 s.n);
  }
}

}  // namespace fragsense::report
