#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ccm/common.hpp"
#include "ccm/forest.hpp"

namespace ccm {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json forest_to_json(const FittedForest& forest) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["hyperparams"] = {{"n_trees", forest.hyperparams.n_trees},
                      {"max_depth", forest.hyperparams.max_depth},
                      {"min_samples_split", forest.hyperparams.min_samples_split},
                      {"min_samples_leaf", forest.hyperparams.min_samples_leaf},
                      {"split_criterion", "gini"},
                      {"seed", forest.hyperparams.seed}};
  j["feature_names"] = forest.feature_names;
  j["classes"] = {-1, 0, 1};
  j["class_totals"] = forest.class_totals;
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : forest.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes)
      nodes.push_back({node.feature, node.threshold, node.left, node.right,
                       node.counts[0], node.counts[1], node.counts[2]});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

inline FittedForest forest_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") ||
      j["format_version"].get<int>() != kModelFormatVersion)
    fail(ErrorKind::Config, "unsupported model format version");
  FittedForest forest;
  const auto& hp = j.at("hyperparams");
  forest.hyperparams.n_trees = hp.at("n_trees").get<int>();
  forest.hyperparams.max_depth = hp.at("max_depth").get<int>();
  forest.hyperparams.min_samples_split = hp.at("min_samples_split").get<int>();
  forest.hyperparams.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
  forest.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
  forest.feature_names =
      j.at("feature_names").get<std::vector<std::string>>();
  auto totals = j.at("class_totals").get<std::vector<std::uint64_t>>();
  if (totals.size() != kNumClasses)
    fail(ErrorKind::Config, "model class_totals must have 3 entries");
  std::copy(totals.begin(), totals.end(), forest.class_totals.begin());
  for (const auto& tree_json : j.at("trees")) {
    rf_detail::Tree tree;
    for (const auto& node_json : tree_json) {
      rf_detail::Node node;
      node.feature = node_json.at(0).get<int>();
      node.threshold = node_json.at(1).get<double>();
      node.left = node_json.at(2).get<int>();
      node.right = node_json.at(3).get<int>();
      node.counts = {node_json.at(4).get<std::uint32_t>(),
                     node_json.at(5).get<std::uint32_t>(),
                     node_json.at(6).get<std::uint32_t>()};
      tree.nodes.push_back(node);
    }
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

inline void save_forest(const FittedForest& forest, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write model file: " + path);
  out << forest_to_json(forest).dump();
}

inline FittedForest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, "malformed model file " + path + ": " + e.what());
  }
  return forest_from_json(j);
}

}  // namespace ccm
