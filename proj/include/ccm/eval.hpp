#pragma once

#include <atomic>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ccm/cohort.hpp"
#include "ccm/common.hpp"
#include "ccm/cv.hpp"
#include "ccm/data.hpp"
#include "ccm/metrics.hpp"
#include "ccm/pmv.hpp"
#include "ccm/similarity.hpp"

namespace ccm {

inline constexpr const char* kGeneralPurposeName = "general-purpose";
inline constexpr const char* kPcmName = "pcm";
inline constexpr const char* kPmvName = "pmv";

struct ExperimentConfig {
  std::vector<CohortRecipe> approaches;
  double train_ratio = 0.8;
  int iterations = 100;
  int probe_m = 1;
  std::uint64_t base_seed = 0;
  std::vector<RfHyperparams> grid = desk_grid();
  int folds = 5;
  bool include_pmv = true;
  PmvFeatureMap pmv_map;
  int workers = 1;

  void validate() const {
    if (iterations < 1) fail(ErrorKind::Parameter, "iterations must be >= 1");
    if (probe_m < 1) fail(ErrorKind::Parameter, "probe_m must be >= 1");
    if (!(train_ratio > 0.0 && train_ratio < 1.0))
      fail(ErrorKind::Parameter, "train_ratio must be in (0,1)");
    if (workers < 1) fail(ErrorKind::Parameter, "workers must be >= 1");
  }
};

struct ResultRow {
  int iteration = 0;
  std::string approach;
  std::string occupant_id;
  double f1 = 0.0;
  // "best" for the intended assignment (and all baselines), "worst" for the
  // deliberate-misassignment ablation
  std::string assignment_kind = "best";
};

struct GroupStats {
  int males = 0;
  int females = 0;
  double height_mean = 0.0;
  double height_std = 0.0;
  double weight_mean = 0.0;
  double weight_std = 0.0;
  std::vector<std::string> occupant_ids;
};

struct MetadataBreakdown {
  GroupStats better_off;  // mean percent change > 0
  GroupStats worse_off;
};

struct EvaluationReport {
  std::vector<ResultRow> rows;
  // approach -> occupant -> mean percent change vs the general-purpose model
  std::map<std::string, std::map<std::string, double>> mean_percent_change;
  std::map<std::string, MetadataBreakdown> metadata;
  std::size_t flagged_zero_general = 0;  // rows excluded from change averages
};

// 100 * (cohort - general) / general; undefined when general is 0 (the row
// is flagged and excluded from averages rather than failing).
inline std::optional<double> percent_change(double cohort_score,
                                            double general_score) {
  if (general_score < 0.0)
    fail(ErrorKind::Parameter, "general score must be >= 0");
  if (general_score == 0.0) return std::nullopt;
  return 100.0 * (cohort_score - general_score) / general_score;
}

// One grid-searched forest over all training rows (sensor + onboarding
// features), scored on each test occupant's full label set.
inline std::map<std::string, double> general_purpose(
    const std::vector<const OccupantRecord*>& train,
    const std::vector<const OccupantRecord*>& test,
    const std::vector<RfHyperparams>& grid, int folds, std::uint64_t seed) {
  if (train.empty() || test.empty())
    fail(ErrorKind::Parameter, "general_purpose needs non-empty train and test");
  TrainingMatrix data = build_matrix(train, /*include_onboarding=*/true);
  FittedForest forest = fit_with_grid_search(data, grid, folds, seed);
  std::map<std::string, double> scores;
  for (const auto* occupant : test) {
    TrainingMatrix rows = build_matrix(*occupant, /*include_onboarding=*/true);
    scores[occupant->profile.occupant_id] =
        f1_micro(rows.labels, forest.predict(rows));
  }
  return scores;
}

// Upper-bound baseline: each test occupant's own PCM, scored by the mean
// held-out F1 of the winning grid point.
inline std::map<std::string, double> pcm_baseline(
    const std::vector<const OccupantRecord*>& test,
    const std::vector<RfHyperparams>& grid, int folds, std::uint64_t seed) {
  std::map<std::string, double> scores;
  for (const auto* occupant : test) {
    TrainingMatrix data = build_matrix(*occupant, /*include_onboarding=*/false);
    GridSearchResult result = grid_search_cv(
        data, grid, folds,
        derive_seed(seed, hash_string(occupant->profile.occupant_id)));
    scores[occupant->profile.occupant_id] = result.best_score;
  }
  return scores;
}

namespace eval_detail {

// m distinct probe row indices for one test occupant, drawn under the
// iteration seed; the remaining indices form the scoring set.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
draw_probe(const OccupantRecord& record, int m, std::uint64_t seed) {
  std::size_t n = record.observations.size();
  if (static_cast<std::size_t>(m) >= n)
    fail(ErrorKind::Parameter,
         "probe_m=" + std::to_string(m) + " must be smaller than the " +
             std::to_string(n) + " rows of occupant " +
             record.profile.occupant_id);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                    n - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[pick(rng)]);
  }
  std::vector<std::size_t> probe(order.begin(), order.begin() + m);
  std::vector<std::size_t> rest(order.begin() + m, order.end());
  std::sort(probe.begin(), probe.end());
  std::sort(rest.begin(), rest.end());
  return {probe, rest};
}

inline GroupStats group_stats(const std::vector<const OccupantRecord*>& members) {
  GroupStats stats;
  std::vector<double> heights, weights;
  for (const auto* r : members) {
    stats.occupant_ids.push_back(r->profile.occupant_id);
    (r->profile.sex == Sex::M ? stats.males : stats.females) += 1;
    heights.push_back(r->profile.height_cm);
    weights.push_back(r->profile.weight_kg);
  }
  auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {0.0, 0.0};
    double mean = std::accumulate(v.begin(), v.end(), 0.0) /
                  static_cast<double>(v.size());
    if (v.size() == 1) return {mean, 0.0};  // single member reports std 0
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };
  std::tie(stats.height_mean, stats.height_std) = mean_std(heights);
  std::tie(stats.weight_mean, stats.weight_std) = mean_std(weights);
  return stats;
}

struct IterationOutput {
  std::vector<ResultRow> rows;
  std::exception_ptr error;
};

}  // namespace eval_detail

// Per-approach better-off/worse-off groups from the mean percent changes.
inline std::map<std::string, MetadataBreakdown> metadata_breakdown(
    const std::map<std::string, std::map<std::string, double>>& changes,
    const std::vector<OccupantRecord>& records) {
  std::map<std::string, const OccupantRecord*> by_id;
  for (const auto& r : records) by_id[r.profile.occupant_id] = &r;

  std::map<std::string, MetadataBreakdown> out;
  for (const auto& [approach, per_occupant] : changes) {
    std::vector<const OccupantRecord*> better, worse;
    for (const auto& [occupant, change] : per_occupant) {
      auto it = by_id.find(occupant);
      if (it == by_id.end()) continue;
      (change > 0.0 ? better : worse).push_back(it->second);
    }
    MetadataBreakdown breakdown;
    breakdown.better_off = eval_detail::group_stats(better);
    breakdown.worse_off = eval_detail::group_stats(worse);
    out[approach] = std::move(breakdown);
  }
  return out;
}

// The full protocol: repeated participant-wise splits, every configured
// approach built on the train side, every test occupant assigned (best and
// worst), baselines recorded, results merged in iteration order. When a
// worker fails, the rows of iterations that did complete are left in
// *partial (if given) before the error propagates.
inline EvaluationReport run_experiment(const ExperimentConfig& config,
                                       const std::vector<OccupantRecord>& records,
                                       EvaluationReport* partial = nullptr) {
  config.validate();
  if (records.size() < 2)
    fail(ErrorKind::Parameter, "experiment needs at least 2 occupants");
  for (const auto& recipe : config.approaches) {
    if (recipe.start_type == StartType::Warm) continue;
    for (const auto& record : records)
      for (const auto& score : recipe.score_names)
        if (!record.profile.survey_score(score))
          fail(ErrorKind::Config,
               "recipe '" + recipe.name + "' needs survey score '" + score +
                   "' which occupant " + record.profile.occupant_id +
                   " does not have");
  }

  bool any_warm = std::any_of(
      config.approaches.begin(), config.approaches.end(),
      [](const CohortRecipe& r) { return r.start_type == StartType::Warm; });

  // PMV depends only on rows, not on the split; computed once.
  std::map<std::string, double> pmv_scores;
  if (config.include_pmv) {
    std::vector<const OccupantRecord*> all;
    for (const auto& r : records) all.push_back(&r);
    pmv_scores = pmv_baseline(all, config.pmv_map);
  }

  std::vector<eval_detail::IterationOutput> outputs(
      static_cast<std::size_t>(config.iterations));
  std::atomic<int> next_iteration{0};

  auto run_iteration = [&](int iteration) {
    std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(iteration);
    ParticipantSplit split =
        split_participants(records.size(), config.train_ratio, seed);
    std::vector<const OccupantRecord*> train, test;
    for (std::size_t i : split.train) train.push_back(&records[i]);
    for (std::size_t i : split.test) test.push_back(&records[i]);

    std::vector<ResultRow>& rows = outputs[static_cast<std::size_t>(iteration)].rows;
    auto emit = [&](const std::string& approach, const std::string& occupant,
                    double f1, const std::string& kind) {
      rows.push_back({iteration, approach, occupant, f1, kind});
    };

    // baselines
    auto general = general_purpose(train, test, config.grid, config.folds,
                                   derive_seed(seed, 0x93e7ull));
    for (const auto* occupant : test)
      emit(kGeneralPurposeName, occupant->profile.occupant_id,
           general.at(occupant->profile.occupant_id), "best");
    auto pcm = pcm_baseline(test, config.grid, config.folds,
                            derive_seed(seed, 0x1c31ull));
    for (const auto* occupant : test)
      emit(kPcmName, occupant->profile.occupant_id,
           pcm.at(occupant->profile.occupant_id), "best");
    if (config.include_pmv)
      for (const auto* occupant : test)
        emit(kPmvName, occupant->profile.occupant_id,
             pmv_scores.at(occupant->profile.occupant_id), "best");

    // PCMs for the training side are shared by all warm recipes
    std::map<std::string, FittedForest> train_pcms;
    std::map<std::string, const FittedForest*> pcm_ptrs;
    if (any_warm) {
      for (const auto* occupant : train) {
        const std::string& id = occupant->profile.occupant_id;
        train_pcms.emplace(
            id, train_pcm(*occupant, config.grid, config.folds,
                          derive_seed(seed, 0xbc3ull, hash_string(id))));
      }
      for (const auto& [id, forest] : train_pcms) pcm_ptrs[id] = &forest;
    }

    for (std::size_t a = 0; a < config.approaches.size(); ++a) {
      const CohortRecipe& recipe = config.approaches[a];
      ModelTrainConfig train_config;
      train_config.grid = config.grid;
      train_config.folds = config.folds;
      train_config.seed = derive_seed(seed, 0xc0405ull, a);
      CohortSet set = build_recipe(recipe, train, pcm_ptrs,
                                   derive_seed(seed, 0x5eedull, a), train_config);

      for (const auto* occupant : test) {
        const std::string& id = occupant->profile.occupant_id;
        std::size_t best = 0, worst = 0;
        TrainingMatrix scoring;
        if (recipe.start_type == StartType::Warm) {
          auto [probe_idx, rest_idx] = eval_detail::draw_probe(
              *occupant, config.probe_m,
              derive_seed(seed, 0x920beull, hash_string(id)));
          TrainingMatrix probe =
              build_matrix_rows(*occupant, probe_idx, /*include_onboarding=*/true);
          best = assign_warm(set, probe);
          worst = assign_worst_warm(set, probe);
          scoring =
              build_matrix_rows(*occupant, rest_idx, /*include_onboarding=*/true);
        } else {
          best = assign_cold(set, occupant->profile);
          worst = assign_worst_cold(set, occupant->profile);
          scoring = build_matrix(*occupant, /*include_onboarding=*/true);
        }
        emit(recipe.name, id,
             f1_micro(scoring.labels, set.cohorts[best].model.predict(scoring)),
             "best");
        emit(recipe.name, id,
             f1_micro(scoring.labels, set.cohorts[worst].model.predict(scoring)),
             "worst");
      }
    }
    log_info("iteration " + std::to_string(iteration + 1) + "/" +
             std::to_string(config.iterations) + " done");
  };

  auto worker = [&]() {
    for (;;) {
      int iteration = next_iteration.fetch_add(1);
      if (iteration >= config.iterations) return;
      try {
        run_iteration(iteration);
      } catch (...) {
        outputs[static_cast<std::size_t>(iteration)].error =
            std::current_exception();
      }
    }
  };

  int n_workers = std::min(config.workers, config.iterations);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  EvaluationReport report;
  for (const auto& output : outputs) {
    if (output.error) {
      if (partial)
        for (const auto& done : outputs)
          if (!done.error)
            partial->rows.insert(partial->rows.end(), done.rows.begin(),
                                 done.rows.end());
      std::rethrow_exception(output.error);
    }
    report.rows.insert(report.rows.end(), output.rows.begin(),
                       output.rows.end());
  }

  // per-occupant mean percent change vs general-purpose, per approach
  std::map<int, std::map<std::string, double>> general_by_iteration;
  for (const auto& row : report.rows)
    if (row.approach == kGeneralPurposeName)
      general_by_iteration[row.iteration][row.occupant_id] = row.f1;

  std::map<std::string, std::map<std::string, std::pair<double, int>>> sums;
  for (const auto& row : report.rows) {
    if (row.approach == kGeneralPurposeName || row.assignment_kind != "best")
      continue;
    double general = general_by_iteration.at(row.iteration).at(row.occupant_id);
    auto change = percent_change(row.f1, general);
    if (!change) {
      ++report.flagged_zero_general;
      continue;
    }
    auto& acc = sums[row.approach][row.occupant_id];
    acc.first += *change;
    acc.second += 1;
  }
  for (const auto& [approach, per_occupant] : sums)
    for (const auto& [occupant, acc] : per_occupant)
      report.mean_percent_change[approach][occupant] = acc.first / acc.second;

  report.metadata = metadata_breakdown(report.mean_percent_change, records);
  return report;
}

}  // namespace ccm
