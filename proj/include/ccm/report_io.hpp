#pragma once

#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccm/common.hpp"
#include "ccm/csv.hpp"
#include "ccm/eval.hpp"
#include "ccm/ini.hpp"
#include "ccm/metrics.hpp"
#include "ccm/time.hpp"

namespace ccm {

inline constexpr const char* kToolVersion = "0.1.0";

// Long-format result table; the layout backs the boxplot-style figures.
inline std::string results_to_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "iteration,approach,occupant_id,f1,assignment_kind\n";
  for (const auto& row : report.rows)
    out << row.iteration << ',' << row.approach << ',' << row.occupant_id
        << ',' << format_double(row.f1) << ',' << row.assignment_kind << '\n';
  return out.str();
}

inline nlohmann::json summary_to_json(const EvaluationReport& report) {
  // per (approach, assignment kind) distribution stats
  std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
  for (const auto& row : report.rows)
    grouped[row.approach][row.assignment_kind].push_back(row.f1);

  nlohmann::json approaches = nlohmann::json::object();
  for (const auto& [approach, kinds] : grouped) {
    nlohmann::json entry = nlohmann::json::object();
    for (const auto& [kind, scores] : kinds) {
      entry[kind] = {{"n", scores.size()},
                     {"median", percentile_linear(scores, 50.0)},
                     {"q25", percentile_linear(scores, 25.0)},
                     {"q75", percentile_linear(scores, 75.0)}};
    }
    approaches[approach] = std::move(entry);
  }

  nlohmann::json changes = nlohmann::json::object();
  for (const auto& [approach, per_occupant] : report.mean_percent_change) {
    nlohmann::json entry = nlohmann::json::object();
    for (const auto& [occupant, change] : per_occupant)
      entry[occupant] = change;
    changes[approach] = std::move(entry);
  }

  auto group_json = [](const GroupStats& g) {
    return nlohmann::json{{"count", g.occupant_ids.size()},
                          {"males", g.males},
                          {"females", g.females},
                          {"height_mean", g.height_mean},
                          {"height_std", g.height_std},
                          {"weight_mean", g.weight_mean},
                          {"weight_std", g.weight_std},
                          {"occupants", g.occupant_ids}};
  };
  nlohmann::json metadata = nlohmann::json::object();
  for (const auto& [approach, breakdown] : report.metadata)
    metadata[approach] = {{"better_off", group_json(breakdown.better_off)},
                          {"worse_off", group_json(breakdown.worse_off)}};

  return nlohmann::json{{"approaches", approaches},
                        {"mean_percent_change", changes},
                        {"metadata_breakdown", metadata},
                        {"flagged_zero_general", report.flagged_zero_general}};
}

inline void save_report(const EvaluationReport& report,
                        const std::string& dir) {
  std::ofstream results(dir + "/results.csv");
  if (!results) fail(ErrorKind::Io, "cannot write " + dir + "/results.csv");
  results << results_to_csv(report);
  std::ofstream summary(dir + "/summary.json");
  if (!summary) fail(ErrorKind::Io, "cannot write " + dir + "/summary.json");
  summary << summary_to_json(report).dump(2) << "\n";
}

// --- experiment config file ------------------------------------------------

struct ExperimentFile {
  ExperimentConfig config;
  std::string observations_path;
  std::string onboarding_path;
};

inline ExperimentFile parse_experiment_config(const IniFile& ini) {
  ExperimentFile file;
  if (auto prefix = ini.get("experiment", "data")) {
    file.observations_path = *prefix + ".csv";
    file.onboarding_path = *prefix + ".onboarding.csv";
  } else {
    file.observations_path = ini.get_required("experiment", "observations");
    file.onboarding_path = ini.get_required("experiment", "onboarding");
  }

  ExperimentConfig& config = file.config;
  config.train_ratio = ini.get_double("experiment", "train_ratio", 0.8);
  config.iterations =
      static_cast<int>(ini.get_int("experiment", "iterations", 100));
  config.probe_m = static_cast<int>(ini.get_int("experiment", "probe_m", 1));
  config.base_seed =
      static_cast<std::uint64_t>(ini.get_int("experiment", "seed", 0));
  config.grid = grid_by_name(ini.get_or("experiment", "grid", "desk"));
  config.folds = static_cast<int>(ini.get_int("experiment", "folds", 5));

  int k_lo = 2, k_hi = 10;
  if (auto range = ini.get("experiment", "k_range")) {
    auto parts = split_list(*range, ':');
    if (parts.size() != 2)
      fail(ErrorKind::Config, "k_range must look like lo:hi");
    k_lo = static_cast<int>(parse_double(parts[0], "k_range lo"));
    k_hi = static_cast<int>(parse_double(parts[1], "k_range hi"));
  }
  double alpha = ini.get_double("experiment", "alpha", 0.5);
  for (const auto& name :
       split_list(ini.get_or("experiment", "approaches", "dist-cross"))) {
    CohortRecipe recipe = recipe_by_name(name, alpha);
    recipe.k_lo = k_lo;
    recipe.k_hi = k_hi;
    config.approaches.push_back(std::move(recipe));
  }

  config.include_pmv = ini.get_or("experiment", "include_pmv", "true") == "true";
  PmvFeatureMap& pmv = config.pmv_map;
  pmv.air_temp_feature =
      ini.get_or("pmv", "air_temp_feature", pmv.air_temp_feature);
  pmv.rh_feature = ini.get_or("pmv", "rh_feature", pmv.rh_feature);
  pmv.clo_feature = ini.get_or("pmv", "clo_feature", pmv.clo_feature);
  if (auto v = ini.get("pmv", "radiant_feature"))
    if (!v->empty()) pmv.radiant_feature = *v;
  if (auto v = ini.get("pmv", "velocity_feature"))
    if (!v->empty()) pmv.velocity_feature = *v;
  if (auto v = ini.get("pmv", "met_feature"))
    if (!v->empty()) pmv.met_feature = *v;
  pmv.static_air_velocity_ms =
      ini.get_double("pmv", "air_velocity", pmv.static_air_velocity_ms);
  pmv.static_met = ini.get_double("pmv", "met", pmv.static_met);
  pmv.thresholds.cool_above =
      ini.get_double("pmv", "cool_above", pmv.thresholds.cool_above);
  pmv.thresholds.warm_below =
      ini.get_double("pmv", "warm_below", pmv.thresholds.warm_below);

  return file;
}

// Written atomically (temp file + rename) when a run completes.
inline void write_run_manifest(const std::string& dir,
                               const std::string& config_path,
                               std::uint64_t base_seed,
                               const std::vector<std::string>& outputs) {
  std::uint64_t config_hash = 0;
  {
    std::ifstream in(config_path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    config_hash = hash_string(buffer.str());
  }
  nlohmann::json manifest;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash));
  manifest["config_hash"] = hash_hex;
  manifest["config_path"] = config_path;
  manifest["base_seed"] = base_seed;
  manifest["tool_version"] = kToolVersion;
  manifest["completed_at"] =
      format_timestamp(static_cast<UnixSeconds>(std::time(nullptr)));
  manifest["outputs"] = outputs;

  std::string tmp = dir + "/manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp);
    out << manifest.dump(2) << "\n";
  }
  std::error_code ec;
  std::filesystem::rename(tmp, dir + "/manifest.json", ec);
  if (ec) fail(ErrorKind::Io, "cannot finalize manifest in " + dir);
}

}  // namespace ccm
