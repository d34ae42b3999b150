#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ccm/cluster.hpp"
#include "ccm/cohort.hpp"
#include "ccm/common.hpp"
#include "ccm/csv.hpp"
#include "ccm/forest_io.hpp"
#include "ccm/similarity.hpp"

namespace ccm {

// Affinity matrices persist as a delimited table (ids as header row and
// first column) plus a JSON sidecar with the construction metadata.
inline void save_affinity(const AffinityMatrix& m, const std::string& path,
                          double alpha = -1.0, double beta = -1.0,
                          double center_c = 0.0, double mu = -1.0) {
  Table table;
  table.header.push_back("occupant_id");
  for (const auto& id : m.occupant_ids) table.header.push_back(id);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row;
    row.push_back(m.occupant_ids[i]);
    for (std::size_t j = 0; j < m.size(); ++j)
      row.push_back(format_double(
          m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
          9));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);

  nlohmann::json meta;
  meta["kind"] = affinity_kind_name(m.kind);
  if (alpha >= 0.0) meta["alpha"] = alpha;
  if (beta >= 0.0) meta["beta"] = beta;
  meta["center_c"] = center_c;
  if (mu >= 0.0) meta["mu"] = mu;
  std::ofstream out(path + ".meta.json");
  if (!out) fail(ErrorKind::Io, "cannot write sidecar for " + path);
  out << meta.dump(2) << "\n";
}

inline void save_k_trace(const KSelectionTrace& trace,
                         const std::string& path) {
  Table table;
  table.header = {"k", "mean_silhouette"};
  for (int k : trace.candidate_ks)
    table.rows.push_back(
        {std::to_string(k), format_double(trace.mean_silhouettes.at(k), 6)});
  write_csv(path, table);
}

// A cohort set persists as a directory: recipe manifest, membership table,
// one model file per cohort, and the k-selection trace when one exists.
inline void save_cohort_set(const CohortSet& set, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + dir);

  nlohmann::json manifest;
  manifest["recipe"] = set.recipe.name;
  manifest["start_type"] =
      set.recipe.start_type == StartType::Warm ? "warm" : "cold";
  manifest["k"] = set.k;
  manifest["training_row_count"] = set.training_row_count;
  switch (set.recipe.cold_kind) {
    case ColdAssignKind::Value:
      manifest["cold_kind"] = "value";
      manifest["attribute"] = set.recipe.attribute;
      break;
    case ColdAssignKind::Median:
      manifest["cold_kind"] = "median";
      manifest["score"] = set.recipe.score_names.at(0);
      manifest["iqr_filter"] = set.recipe.iqr_filter;
      manifest["median"] = set.median;
      break;
    case ColdAssignKind::Centroid:
      manifest["cold_kind"] = "centroid";
      manifest["score_names"] = set.recipe.score_names;
      manifest["standardized_names"] = set.standardized_names;
      manifest["feature_means"] = set.feature_means;
      manifest["feature_stds"] = set.feature_stds;
      break;
  }
  if (set.recipe.start_type == StartType::Warm) {
    manifest["alpha"] = set.recipe.weights.alpha;
    manifest["beta"] = set.recipe.weights.beta;
  }
  nlohmann::json cohorts = nlohmann::json::array();
  for (std::size_t c = 0; c < set.cohorts.size(); ++c) {
    nlohmann::json entry;
    entry["index"] = c;
    entry["members"] = set.cohorts[c].member_ids;
    if (!set.cohorts[c].value.empty()) entry["value"] = set.cohorts[c].value;
    if (!set.cohorts[c].centroid.empty())
      entry["centroid"] = set.cohorts[c].centroid;
    cohorts.push_back(std::move(entry));
  }
  manifest["cohorts"] = std::move(cohorts);
  std::ofstream out(dir + "/manifest.json");
  if (!out) fail(ErrorKind::Io, "cannot write " + dir + "/manifest.json");
  out << manifest.dump(2) << "\n";

  Table membership;
  membership.header = {"occupant_id", "cohort"};
  for (std::size_t c = 0; c < set.cohorts.size(); ++c)
    for (const auto& id : set.cohorts[c].member_ids)
      membership.rows.push_back({id, std::to_string(c)});
  write_csv(dir + "/membership.csv", membership);

  for (std::size_t c = 0; c < set.cohorts.size(); ++c)
    save_forest(set.cohorts[c].model,
                dir + "/cohort_" + std::to_string(c) + ".model.json");
  if (set.k_trace) save_k_trace(*set.k_trace, dir + "/k_trace.csv");
}

inline CohortSet load_cohort_set(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) fail(ErrorKind::Io, "cannot open " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, "malformed manifest in " + dir + ": " + e.what());
  }

  CohortSet set;
  set.recipe.name = manifest.at("recipe").get<std::string>();
  set.recipe.start_type =
      manifest.at("start_type").get<std::string>() == "warm" ? StartType::Warm
                                                             : StartType::Cold;
  set.k = manifest.at("k").get<int>();
  set.training_row_count = manifest.value("training_row_count", 0u);
  std::string cold_kind = manifest.value("cold_kind", "value");
  if (cold_kind == "value") {
    set.recipe.cold_kind = ColdAssignKind::Value;
    set.recipe.attribute = manifest.value("attribute", "");
  } else if (cold_kind == "median") {
    set.recipe.cold_kind = ColdAssignKind::Median;
    set.recipe.score_names = {manifest.at("score").get<std::string>()};
    set.recipe.iqr_filter = manifest.value("iqr_filter", false);
    set.median = manifest.at("median").get<double>();
  } else {
    set.recipe.cold_kind = ColdAssignKind::Centroid;
    set.recipe.score_names =
        manifest.at("score_names").get<std::vector<std::string>>();
    set.standardized_names =
        manifest.at("standardized_names").get<std::vector<std::string>>();
    set.feature_means =
        manifest.at("feature_means").get<std::vector<double>>();
    set.feature_stds = manifest.at("feature_stds").get<std::vector<double>>();
  }
  if (set.recipe.start_type == StartType::Warm)
    set.recipe.weights =
        BlendWeights(manifest.at("alpha").get<double>(),
                     manifest.at("beta").get<double>());

  for (const auto& entry : manifest.at("cohorts")) {
    Cohort cohort;
    cohort.member_ids = entry.at("members").get<std::vector<std::string>>();
    cohort.value = entry.value("value", "");
    if (entry.contains("centroid"))
      cohort.centroid = entry.at("centroid").get<std::vector<double>>();
    cohort.model = load_forest(dir + "/cohort_" +
                               std::to_string(set.cohorts.size()) +
                               ".model.json");
    set.cohorts.push_back(std::move(cohort));
  }
  return set;
}

}  // namespace ccm
