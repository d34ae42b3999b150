#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/data.hpp"
#include "ccm/forest.hpp"
#include "ccm/metrics.hpp"

namespace ccm {

// Pseudo-features injected from the onboarding profile when a model is
// trained across occupants (cohort and general-purpose models).
inline const std::vector<std::string>& onboarding_feature_names() {
  static const std::vector<std::string> names = {"sex", "height_cm",
                                                 "weight_kg"};
  return names;
}

// Builds a flat design matrix from records. With include_onboarding the
// sex/height/weight columns are appended; PCMs must not use them since the
// values are constant within one occupant.
inline TrainingMatrix build_matrix(
    const std::vector<const OccupantRecord*>& records,
    bool include_onboarding) {
  TrainingMatrix m;
  if (records.empty()) return m;
  m.feature_names = records.front()->feature_names;
  if (include_onboarding)
    m.feature_names.insert(m.feature_names.end(),
                           onboarding_feature_names().begin(),
                           onboarding_feature_names().end());
  for (const auto* record : records) {
    if (record->feature_names != records.front()->feature_names)
      fail(ErrorKind::Schema, "records disagree on the feature schema");
    for (const auto& row : record->observations) {
      m.values.insert(m.values.end(), row.features.begin(),
                      row.features.end());
      if (include_onboarding) {
        m.values.push_back(record->profile.sex == Sex::M ? 1.0 : 0.0);
        m.values.push_back(record->profile.height_cm);
        m.values.push_back(record->profile.weight_kg);
      }
      m.labels.push_back(row.label);
    }
  }
  return m;
}

inline TrainingMatrix build_matrix(const OccupantRecord& record,
                                   bool include_onboarding = false) {
  return build_matrix(std::vector<const OccupantRecord*>{&record},
                      include_onboarding);
}

// Matrix for a subset of one occupant's rows, matching a model's feature
// layout (used for probes and probe-excluded scoring).
inline TrainingMatrix build_matrix_rows(
    const OccupantRecord& record, const std::vector<std::size_t>& row_indices,
    bool include_onboarding) {
  TrainingMatrix m;
  m.feature_names = record.feature_names;
  if (include_onboarding)
    m.feature_names.insert(m.feature_names.end(),
                           onboarding_feature_names().begin(),
                           onboarding_feature_names().end());
  for (std::size_t r : row_indices) {
    const auto& row = record.observations.at(r);
    m.values.insert(m.values.end(), row.features.begin(), row.features.end());
    if (include_onboarding) {
      m.values.push_back(record.profile.sex == Sex::M ? 1.0 : 0.0);
      m.values.push_back(record.profile.height_cm);
      m.values.push_back(record.profile.weight_kg);
    }
    m.labels.push_back(row.label);
  }
  return m;
}

struct GridSearchResult {
  RfHyperparams best;
  std::vector<std::pair<RfHyperparams, double>> cv_scores;  // grid order
  double best_score = 0.0;
};

// Shuffles rows once under seed, slices them into `folds` contiguous folds,
// and scores every grid point by mean held-out F1-micro. Ties keep the
// earliest grid entry.
inline GridSearchResult grid_search_cv(const TrainingMatrix& data,
                                       const std::vector<RfHyperparams>& grid,
                                       int folds, std::uint64_t seed) {
  if (folds < 2) fail(ErrorKind::Parameter, "folds must be >= 2");
  if (grid.empty()) fail(ErrorKind::Parameter, "empty hyperparameter grid");
  std::size_t n = data.n_rows();
  if (n < static_cast<std::size_t>(folds))
    fail(ErrorKind::InsufficientData,
         std::to_string(n) + " rows cannot form " + std::to_string(folds) +
             " folds");

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // fold f covers [bounds[f], bounds[f+1])
  std::vector<std::size_t> bounds(static_cast<std::size_t>(folds) + 1, 0);
  std::size_t base = n / static_cast<std::size_t>(folds);
  std::size_t rem = n % static_cast<std::size_t>(folds);
  for (std::size_t f = 0; f < static_cast<std::size_t>(folds); ++f)
    bounds[f + 1] = bounds[f] + base + (f < rem ? 1 : 0);

  std::size_t p = data.n_features();
  GridSearchResult result;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double score_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      TrainingMatrix train, test;
      train.feature_names = data.feature_names;
      test.feature_names = data.feature_names;
      for (std::size_t i = 0; i < n; ++i) {
        bool in_fold = i >= bounds[static_cast<std::size_t>(f)] &&
                       i < bounds[static_cast<std::size_t>(f) + 1];
        TrainingMatrix& dst = in_fold ? test : train;
        const double* row = data.row(order[i]);
        dst.values.insert(dst.values.end(), row, row + p);
        dst.labels.push_back(data.labels[order[i]]);
      }
      RfHyperparams params = grid[g];
      params.seed = derive_seed(seed, g, static_cast<std::uint64_t>(f));
      FittedForest forest = fit_forest(train, params);
      score_sum += f1_micro(test.labels, forest.predict(test));
    }
    double mean = score_sum / folds;
    result.cv_scores.emplace_back(grid[g], mean);
    if (g == 0 || mean > result.best_score) {
      result.best = grid[g];
      result.best_score = mean;
    }
  }
  return result;
}

// Grid-search then refit on all rows with the winning hyperparameters.
inline FittedForest fit_with_grid_search(const TrainingMatrix& data,
                                         const std::vector<RfHyperparams>& grid,
                                         int folds, std::uint64_t seed,
                                         GridSearchResult* search = nullptr) {
  GridSearchResult result = grid_search_cv(data, grid, folds, seed);
  RfHyperparams best = result.best;
  best.seed = derive_seed(seed, 0xf17ull);
  if (search) *search = result;
  return fit_forest(data, best);
}

// Personal comfort model: the occupant's own rows only, onboarding-derived
// constants excluded.
inline FittedForest train_pcm(const OccupantRecord& record,
                              const std::vector<RfHyperparams>& grid,
                              int folds, std::uint64_t seed) {
  TrainingMatrix data = build_matrix(record, /*include_onboarding=*/false);
  return fit_with_grid_search(data, grid, folds, seed);
}

// Table A.1 grid: 3 tree counts x 10 depths x 3 split minima x 3 leaf
// minima = 270 combinations.
inline std::vector<RfHyperparams> full_grid() {
  std::vector<RfHyperparams> grid;
  for (int trees : {100, 300, 500})
    for (int depth = 1; depth <= 10; ++depth)
      for (int split : {2, 3, 4})
        for (int leaf : {1, 2, 3}) {
          RfHyperparams p;
          p.n_trees = trees;
          p.max_depth = depth;
          p.min_samples_split = split;
          p.min_samples_leaf = leaf;
          grid.push_back(p);
        }
  return grid;
}

// Reduced grid for interactive runs; --full-grid restores the 270-point one.
inline std::vector<RfHyperparams> desk_grid() {
  std::vector<RfHyperparams> grid;
  for (int depth : {3, 6, 10}) {
    RfHyperparams p;
    p.n_trees = 100;
    p.max_depth = depth;
    p.min_samples_split = 2;
    p.min_samples_leaf = 1;
    grid.push_back(p);
  }
  return grid;
}

inline std::vector<RfHyperparams> grid_by_name(const std::string& name) {
  if (name == "desk") return desk_grid();
  if (name == "full") return full_grid();
  fail(ErrorKind::Config, "unknown grid profile '" + name +
                              "' (expected desk or full)");
}

}  // namespace ccm
