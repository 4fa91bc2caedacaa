#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fragsense/features.hpp"
#include "fragsense/relative.hpp"

namespace fragsense::report {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// FNV-1a over bytes; stable across runs and builds, unlike std::hash.
std::uint64_t fnv1a(const void* data, std::size_t n);
std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t v);

struct Provenance {
  std::string config_digest;                    // hash of the effective config text
  std::map<std::string, std::string> inputs;    // path -> content digest
  std::vector<std::string> overrides;           // flags changed from defaults
  std::uint64_t seed = 0;
};

// Feature report, CSV and JSON forms. Rows are written sorted by
// (trial_id, source, kind) so reruns are byte-identical.
void write_feature_csv(const std::vector<features::FeatureRow>& rows,
                       const std::string& path);
void write_feature_json(const std::vector<features::FeatureRow>& rows,
                        const std::string& path, const Provenance& prov);
std::vector<features::FeatureRow> read_feature_json(const std::string& path);

void write_calibration_json(const relative::ReferenceCalibration& cal,
                            const std::string& path, const Provenance& prov);
relative::ReferenceCalibration read_calibration_json(const std::string& path);

// Report JSON: {provenance, reference: {...}, rows: [...]}.
void write_summary_json(const relative::ReferenceCalibration& ref,
                        const std::vector<relative::SummaryRow>& rows,
                        const std::string& path, const Provenance& prov);

// Plot-data CSV (ratio vs pile, grouped by source/operator).
void write_ratio_plot_csv(const std::vector<relative::SummaryRow>& rows,
                          const std::string& path);

std::vector<features::FeatureRow> sort_rows(std::vector<features::FeatureRow> rows);

}  // namespace fragsense::report
