#include "fragsense/trial_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace fragsense {

const std::vector<std::string>& channel_registry() {
  static const std::vector<std::string> names = {
      "bucket_acc_x", "bucket_acc_y", "bucket_acc_z", "boom_acc_x", "boom_acc_y",
      "boom_acc_z",   "p_base",       "p_rod",        "d_bucket",   "d_lift",
      "speed"};
  return names;
}

bool is_registered_channel(const std::string& name) {
  const auto& reg = channel_registry();
  return std::find(reg.begin(), reg.end(), name) != reg.end();
}

}  // namespace fragsense

namespace fragsense::trial_io {

std::string units_for_channel(const std::string& name) {
  if (name.find("acc") != std::string::npos) return "m/s^2";
  if (name == "p_base" || name == "p_rod") return "bar";
  if (name == "d_bucket" || name == "d_lift") return "mm";
  if (name == "speed") return "m/s";
  return "";
}

namespace {

double parse_cell(const std::string& cell, const std::string& file, long line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw parse_error(file, line, "non-numeric cell '" + cell + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Columns of one channel file: header names -> sample vectors.
struct FileColumns {
  std::vector<std::string> names;  // excluding t_s
  std::vector<std::vector<double>> values;
  double t0 = 0.0;
  std::size_t rows = 0;
};

FileColumns read_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema_error("cannot open channel file " + path);
  FileColumns fc;
  std::string line;
  long line_no = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (line_no == 1) {
      if (cells.empty() || cells.front() != "t_s")
        throw parse_error(path, 1, "header must start with t_s");
      if (cells.size() < 2) throw parse_error(path, 1, "no value columns");
      fc.names.assign(cells.begin() + 1, cells.end());
      if (fc.names.size() == 1 && fc.names.front() == "value") fc.names.clear();
      fc.values.resize(std::max<std::size_t>(fc.names.size(), 1));
      continue;
    }
    if (cells.size() != fc.values.size() + 1)
      throw parse_error(path, line_no, "wrong number of columns");
    const double t = parse_cell(cells[0], path, line_no);
    if (first_data) {
      fc.t0 = t;
      first_data = false;
    }
    for (std::size_t c = 0; c < fc.values.size(); ++c)
      fc.values[c].push_back(parse_cell(cells[c + 1], path, line_no));
    ++fc.rows;
  }
  if (fc.rows == 0) throw schema_error("channel file " + path + " has no samples");
  return fc;
}

}  // namespace

TrialRecord load_trial(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw schema_error("cannot open manifest " + manifest_path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw schema_error("manifest " + manifest_path + ": " + e.what());
  }

  TrialRecord trial;
  try {
    trial.trial_id = j.at("trial_id").get<std::string>();
    trial.pile_label = j.at("pile_label").get<std::string>();
    trial.operator_id = j.at("operator").get<std::string>();
    trial.day = j.at("day").get<int>();
    if (j.contains("payload_mass_kg") && !j["payload_mass_kg"].is_null())
      trial.payload_mass_kg = j["payload_mass_kg"].get<double>();
  } catch (const ordered_json::exception& e) {
    throw schema_error("manifest " + manifest_path + ": " + e.what());
  }
  if (trial.payload_mass_kg && !(*trial.payload_mass_kg > 0.0))
    throw schema_error("manifest " + manifest_path + ": payload_mass_kg must be > 0");

  const fs::path base = fs::path(manifest_path).parent_path();
  std::map<std::string, FileColumns> cache;
  if (!j.contains("channels") || !j["channels"].is_array() || j["channels"].empty())
    throw schema_error("manifest " + manifest_path + ": no channels declared");

  for (const auto& cj : j["channels"]) {
    std::string name, file;
    double rate = 0.0;
    try {
      name = cj.at("name").get<std::string>();
      file = cj.at("file").get<std::string>();
      rate = cj.at("rate_hz").get<double>();
    } catch (const ordered_json::exception& e) {
      throw schema_error("manifest " + manifest_path + ": " + e.what());
    }
    if (!is_registered_channel(name))
      throw schema_error("manifest declares unknown channel '" + name + "'");
    if (!(rate > 0.0))
      throw schema_error("channel " + name + ": rate_hz must be positive");

    const std::string path = (base / file).string();
    auto it = cache.find(path);
    if (it == cache.end()) it = cache.emplace(path, read_channel_file(path)).first;
    const FileColumns& fc = it->second;

    Channel ch;
    ch.name = name;
    ch.rate_hz = rate;
    ch.t0_s = fc.t0;
    if (fc.names.empty()) {
      ch.samples = fc.values.front();
    } else {
      const auto col = std::find(fc.names.begin(), fc.names.end(), name);
      if (col == fc.names.end())
        throw schema_error("channel " + name + " not found in " + path);
      ch.samples = fc.values[static_cast<std::size_t>(col - fc.names.begin())];
    }
    trial.channels[name] = std::move(ch);
  }
  return trial;
}

void save_trial(const TrialRecord& trial, const std::string& dir,
                const std::string& manifest_name) {
  fs::create_directories(dir);
  ordered_json j;
  j["trial_id"] = trial.trial_id;
  j["pile_label"] = trial.pile_label;
  j["operator"] = trial.operator_id;
  j["day"] = trial.day;
  if (trial.payload_mass_kg) j["payload_mass_kg"] = *trial.payload_mass_kg;
  j["channels"] = ordered_json::array();

  for (const auto& [name, ch] : trial.channels) {
    const std::string fname = trial.trial_id + "." + name + ".csv";
    const std::string path = (fs::path(dir) / fname).string();
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"),
                                                      &std::fclose);
    if (!f) throw config_error("cannot write " + path);
    std::fprintf(f.get(), "t_s,value\n");
    // %.17g keeps the double -> text -> double round trip exact.
    for (std::size_t k = 0; k < ch.size(); ++k)
      std::fprintf(f.get(), "%.9f,%.17g\n", ch.time_at(k), ch.samples[k]);
    ordered_json cj;
    cj["name"] = name;
    cj["file"] = fname;
    cj["rate_hz"] = ch.rate_hz;
    cj["units"] = units_for_channel(name);
    j["channels"].push_back(cj);
  }

  std::ofstream out(fs::path(dir) / manifest_name);
  if (!out) throw config_error("cannot write manifest in " + dir);
  out << j.dump(2) << "\n";
}

std::vector<std::string> find_manifests(const std::string& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string p = e.path().string();
    if (p.size() > 14 && p.substr(p.size() - 14) == ".manifest.json") out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void save_campaign(const std::vector<simulate::CampaignTrial>& trials,
                   const std::string& dir) {
  fs::create_directories(dir);
  ordered_json truth;
  truth["schema_version"] = 1;
  truth["trials"] = ordered_json::array();
  std::map<std::string, double> nominal;
  for (const auto& t : trials) {
    save_trial(t.record, dir, t.trial_id + ".manifest.json");
    ordered_json tj;
    tj["trial_id"] = t.trial_id;
    tj["pile_label"] = t.pile_label;
    tj["operator"] = t.operator_id;
    tj["onset_s"] = t.onset_s;
    tj["d_bar_mm"] = t.truth.d_bar_mm;
    tj["x_bar_mass_weighted_mm"] = t.truth.x_bar_mass_weighted_mm;
    tj["mass_kg"] = t.truth.mass_kg;
    tj["n_particles"] = t.truth.count;
    truth["trials"].push_back(tj);
    nominal[t.pile_label] = t.nominal_xbar_mm;
  }
  truth["piles"] = ordered_json::array();
  for (const auto& [label, xbar] : nominal) {
    ordered_json pj;
    pj["pile_label"] = label;
    pj["nominal_xbar_mm"] = xbar;
    truth["piles"].push_back(pj);
  }
  std::ofstream out(fs::path(dir) / "ground_truth.json");
  if (!out) throw config_error("cannot write ground truth in " + dir);
  out << truth.dump(2) << "\n";
}

}  // namespace fragsense::trial_io
