#pragma once

#include <string>
#include <vector>

#include "fragsense/simulate.hpp"
#include "fragsense/types.hpp"

namespace fragsense::trial_io {

// Trial manifest JSON: {trial_id, pile_label, operator, day,
// payload_mass_kg?, channels: [{name, file, rate_hz, units}]}.
// Channel files are two-column `t_s,value` CSVs, or one wide CSV shared by
// several channels of a single rate (`t_s` plus named columns).
TrialRecord load_trial(const std::string& manifest_path);

// Writes one CSV per channel next to the manifest. Round-trips exactly
// through load_trial.
void save_trial(const TrialRecord& trial, const std::string& dir,
                const std::string& manifest_name);

// All manifest files (*.manifest.json) under a directory, sorted by path.
std::vector<std::string> find_manifests(const std::string& dir);

// Campaign output: per-trial channel CSVs + manifests + a ground-truth
// sidecar (per-pile nominal means, per-trial realized stats and onset).
void save_campaign(const std::vector<simulate::CampaignTrial>& trials,
                   const std::string& dir);

std::string units_for_channel(const std::string& name);

}  // namespace fragsense::trial_io
