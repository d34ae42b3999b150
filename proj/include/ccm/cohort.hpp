#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccm/cluster.hpp"
#include "ccm/common.hpp"
#include "ccm/cv.hpp"
#include "ccm/data.hpp"
#include "ccm/forest.hpp"
#include "ccm/metrics.hpp"
#include "ccm/similarity.hpp"

namespace ccm {

enum class StartType { Cold, Warm };
enum class ColdAssignKind { Value, Median, Centroid };

// A named cohort-building recipe. Cold recipes carry a survey/attribute
// specification; warm recipes carry blend weights.
struct CohortRecipe {
  std::string name;
  StartType start_type = StartType::Cold;

  // cold-start
  ColdAssignKind cold_kind = ColdAssignKind::Value;
  std::string attribute;                  // Value recipes (e.g. "sex")
  std::vector<std::string> score_names;   // Median: one; Centroid: several
  bool iqr_filter = false;

  // warm-start
  BlendWeights weights;

  int k_lo = 2;
  int k_hi = 10;
};

// Builds a recipe from its CLI/config name. alpha only affects the warm
// dist-cross recipe (beta = 1 - alpha).
inline CohortRecipe recipe_by_name(const std::string& name,
                                   double alpha = 0.5) {
  CohortRecipe r;
  r.name = name;
  if (name == "sex") {
    r.cold_kind = ColdAssignKind::Value;
    r.attribute = "sex";
  } else if (name == "surveys") {
    r.cold_kind = ColdAssignKind::Centroid;
    r.score_names = {"hsps", "swls"};
    for (const auto& t : b5p_trait_names()) r.score_names.push_back(t);
  } else if (name == "sensitive") {
    r.cold_kind = ColdAssignKind::Median;
    r.score_names = {"hsps"};
    r.iqr_filter = true;
  } else if (name == "life-satisfaction") {
    r.cold_kind = ColdAssignKind::Median;
    r.score_names = {"swls"};
    r.iqr_filter = true;
  } else if (name == "personality") {
    r.cold_kind = ColdAssignKind::Centroid;
    r.score_names = {b5p_trait_names().begin(), b5p_trait_names().end()};
  } else if (name == "agreeableness") {
    r.cold_kind = ColdAssignKind::Median;
    r.score_names = {"agreeableness"};
  } else if (name == "dist-cross") {
    r.start_type = StartType::Warm;
    r.weights = BlendWeights(alpha, 1.0 - alpha);
  } else if (name == "cross") {
    r.start_type = StartType::Warm;
    r.weights = BlendWeights(1.0, 0.0);
  } else {
    fail(ErrorKind::Config, "unknown cohort recipe '" + name + "'");
  }
  return r;
}

inline const std::vector<std::string>& all_recipe_names() {
  static const std::vector<std::string> names = {
      "sex",          "surveys",       "sensitive", "life-satisfaction",
      "personality",  "agreeableness", "dist-cross", "cross"};
  return names;
}

struct Cohort {
  std::vector<std::string> member_ids;
  FittedForest model;
  std::string value;             // Value recipes: the matching attribute value
  std::vector<double> centroid;  // Centroid recipes: standardized-space mean
};

struct CohortSet {
  CohortRecipe recipe;
  std::vector<Cohort> cohorts;
  int k = 0;
  std::optional<KSelectionTrace> k_trace;
  double median = 0.0;  // Median recipes: split point in raw score units
  std::vector<std::string> standardized_names;  // Centroid recipes
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  std::size_t training_row_count = 0;
};

// How the cohort models themselves are trained (they always see the full
// sensor + onboarding feature set).
struct ModelTrainConfig {
  std::vector<RfHyperparams> grid = desk_grid();
  int folds = 5;
  std::uint64_t seed = 0;
};

namespace cohort_detail {

inline FittedForest train_cohort_model(
    const std::vector<const OccupantRecord*>& members,
    const ModelTrainConfig& config, std::uint64_t cohort_stream) {
  TrainingMatrix data = build_matrix(members, /*include_onboarding=*/true);
  return fit_with_grid_search(data, config.grid, config.folds,
                              derive_seed(config.seed, cohort_stream));
}

inline std::string profile_value(const OnboardingProfile& profile,
                                 const std::string& attribute) {
  if (attribute == "sex") return sex_to_string(profile.sex);
  fail(ErrorKind::Config, "unknown categorical attribute '" + attribute + "'");
}

inline double required_score(const OnboardingProfile& profile,
                             const std::string& name) {
  auto v = profile.survey_score(name);
  if (!v)
    fail(ErrorKind::Config, "occupant " + profile.occupant_id +
                                " lacks survey score '" + name +
                                "' required by the recipe");
  return *v;
}

}  // namespace cohort_detail

// One cohort per distinct categorical value (e.g. Female / Male).
inline CohortSet build_cold_value(
    const std::vector<const OccupantRecord*>& records,
    const std::string& attribute, const ModelTrainConfig& config) {
  std::map<std::string, std::vector<const OccupantRecord*>> groups;
  for (const auto* r : records)
    groups[cohort_detail::profile_value(r->profile, attribute)].push_back(r);
  if (groups.size() < 2)
    fail(ErrorKind::DegenerateSplit,
         "attribute '" + attribute + "' has a single value across occupants");
  for (const auto& [value, members] : groups)
    if (members.size() < 2)
      fail(ErrorKind::DegenerateSplit,
           "attribute value '" + value + "' has fewer than 2 occupants");

  CohortSet set;
  set.recipe.name = attribute;
  set.recipe.cold_kind = ColdAssignKind::Value;
  set.recipe.attribute = attribute;
  std::size_t index = 0;
  for (const auto& [value, members] : groups) {
    Cohort cohort;
    cohort.value = value;
    for (const auto* m : members) {
      cohort.member_ids.push_back(m->profile.occupant_id);
      set.training_row_count += m->observations.size();
    }
    cohort.model = cohort_detail::train_cohort_model(members, config, index);
    set.cohorts.push_back(std::move(cohort));
    ++index;
  }
  set.k = static_cast<int>(set.cohorts.size());
  return set;
}

// Low/high cohorts split at the median of the (optionally IQR-filtered)
// scores. Filtered occupants stay out of the membership but the stored
// median still classifies any profile.
inline CohortSet build_cold_median(
    const std::vector<const OccupantRecord*>& records, const std::string& score,
    bool iqr_filter, const ModelTrainConfig& config) {
  std::vector<std::pair<double, const OccupantRecord*>> scored;
  for (const auto* r : records)
    scored.emplace_back(cohort_detail::required_score(r->profile, score), r);

  std::vector<const OccupantRecord*> retained;
  if (iqr_filter) {
    std::vector<double> values;
    for (const auto& [v, r] : scored) values.push_back(v);
    std::sort(values.begin(), values.end());
    double q25 = percentile_linear(values, 25.0);
    double q75 = percentile_linear(values, 75.0);
    for (const auto& [v, r] : scored)
      if (v <= q25 || v >= q75) retained.push_back(r);
  } else {
    for (const auto& [v, r] : scored) retained.push_back(r);
  }
  if (retained.size() < 2)
    fail(ErrorKind::DegenerateSplit,
         "fewer than 2 occupants retained for the median split on '" + score +
             "'");

  std::vector<double> retained_scores;
  for (const auto* r : retained)
    retained_scores.push_back(cohort_detail::required_score(r->profile, score));
  double median_value = percentile_linear(retained_scores, 50.0);

  std::vector<const OccupantRecord*> low, high;
  for (std::size_t i = 0; i < retained.size(); ++i)
    (retained_scores[i] <= median_value ? low : high).push_back(retained[i]);
  if (low.empty() || high.empty())
    fail(ErrorKind::DegenerateSplit,
         "median split on '" + score + "' left one side empty");

  CohortSet set;
  set.recipe.name = score;
  set.recipe.cold_kind = ColdAssignKind::Median;
  set.recipe.score_names = {score};
  set.recipe.iqr_filter = iqr_filter;
  set.median = median_value;
  std::size_t index = 0;
  for (const auto* side : {&low, &high}) {
    Cohort cohort;
    for (const auto* m : *side) {
      cohort.member_ids.push_back(m->profile.occupant_id);
      set.training_row_count += m->observations.size();
    }
    cohort.model = cohort_detail::train_cohort_model(*side, config, index);
    set.cohorts.push_back(std::move(cohort));
    ++index;
  }
  set.k = 2;
  return set;
}

// Data-driven cold cohorts: spectral clustering of standardized survey
// scores, k picked by silhouette, per-cohort centroids kept so new
// profiles can be assigned inductively.
inline CohortSet build_cold_datadriven(
    const std::vector<const OccupantRecord*>& records,
    const std::vector<std::string>& score_names, int k_lo, int k_hi,
    std::uint64_t seed, const ModelTrainConfig& config) {
  if (records.size() < 4)
    fail(ErrorKind::Parameter,
         "data-driven cohorts need at least 4 occupants");
  std::vector<const OnboardingProfile*> profiles;
  for (const auto* r : records) profiles.push_back(&r->profile);

  FeatureKSelection selection =
      select_k_features(profiles, score_names, k_lo, k_hi, seed);
  const ClusterAssignment& assignment =
      selection.assignments.at(selection.trace.chosen_k);

  CohortSet set;
  set.recipe.name = "datadriven";
  set.recipe.cold_kind = ColdAssignKind::Centroid;
  set.recipe.score_names = score_names;
  set.recipe.k_lo = k_lo;
  set.recipe.k_hi = k_hi;
  set.k = assignment.k;
  set.k_trace = selection.trace;
  set.standardized_names = selection.features.feature_names;
  set.feature_means = selection.features.means;
  set.feature_stds = selection.features.stds;

  const Eigen::Index d = selection.features.values.cols();
  for (int c = 0; c < assignment.k; ++c) {
    Cohort cohort;
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(d);
    std::vector<const OccupantRecord*> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (assignment.labels[i] != c) continue;
      members.push_back(records[i]);
      cohort.member_ids.push_back(records[i]->profile.occupant_id);
      centroid += selection.features.values.row(static_cast<Eigen::Index>(i));
      set.training_row_count += records[i]->observations.size();
    }
    centroid /= static_cast<double>(members.size());
    cohort.centroid.assign(centroid.data(), centroid.data() + d);
    cohort.model = cohort_detail::train_cohort_model(
        members, config, static_cast<std::size_t>(c));
    set.cohorts.push_back(std::move(cohort));
  }
  return set;
}

// Carries the intermediate similarity products of a warm-start build so
// callers can persist or inspect them.
struct WarmBuildTrace {
  AffinityMatrix cross;
  AffinityMatrix distribution;
  AffinityMatrix blended;
  double distribution_mu = 0.0;  // kernel width used on the JS divergences
};

// Warm-start cohorts: blended affinity (cross-model and distribution),
// spectral clustering at the silhouette-chosen k.
inline CohortSet build_warm(
    const std::vector<const OccupantRecord*>& records,
    const std::map<std::string, const FittedForest*>& pcms, BlendWeights weights,
    int k_lo, int k_hi, std::uint64_t seed, const ModelTrainConfig& config,
    WarmBuildTrace* trace = nullptr) {
  AffinityMatrix cross = cross_model_matrix(records, pcms);
  double distribution_mu = 0.0;
  AffinityMatrix dist = distribution_matrix(records, &distribution_mu);
  AffinityMatrix blended = blend(cross, dist, weights);
  if (trace) {
    trace->cross = cross;
    trace->distribution = dist;
    trace->blended = blended;
    trace->distribution_mu = distribution_mu;
  }

  KSelection selection = select_k(blended, k_lo, k_hi, seed);
  const ClusterAssignment& assignment =
      selection.results.at(selection.trace.chosen_k).assignment;

  CohortSet set;
  set.recipe.name = weights.beta == 0.0 ? "cross" : "dist-cross";
  set.recipe.start_type = StartType::Warm;
  set.recipe.weights = weights;
  set.recipe.k_lo = k_lo;
  set.recipe.k_hi = k_hi;
  set.k = assignment.k;
  set.k_trace = selection.trace;
  for (int c = 0; c < assignment.k; ++c) {
    Cohort cohort;
    std::vector<const OccupantRecord*> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (assignment.labels[i] != c) continue;
      members.push_back(records[i]);
      cohort.member_ids.push_back(records[i]->profile.occupant_id);
      set.training_row_count += records[i]->observations.size();
    }
    cohort.model = cohort_detail::train_cohort_model(
        members, config, static_cast<std::size_t>(c));
    set.cohorts.push_back(std::move(cohort));
  }
  return set;
}

// Builds the named recipe against a training population. Warm recipes
// require a PCM per training occupant.
inline CohortSet build_recipe(
    const CohortRecipe& recipe, const std::vector<const OccupantRecord*>& records,
    const std::map<std::string, const FittedForest*>& pcms,
    std::uint64_t seed, const ModelTrainConfig& config,
    WarmBuildTrace* trace = nullptr) {
  CohortSet set;
  if (recipe.start_type == StartType::Warm) {
    set = build_warm(records, pcms, recipe.weights, recipe.k_lo, recipe.k_hi,
                     seed, config, trace);
  } else if (recipe.cold_kind == ColdAssignKind::Value) {
    set = build_cold_value(records, recipe.attribute, config);
  } else if (recipe.cold_kind == ColdAssignKind::Median) {
    set = build_cold_median(records, recipe.score_names.at(0),
                            recipe.iqr_filter, config);
  } else {
    set = build_cold_datadriven(records, recipe.score_names, recipe.k_lo,
                                recipe.k_hi, seed, config);
  }
  set.recipe.name = recipe.name;
  set.recipe.start_type = recipe.start_type;
  return set;
}

// --- assignment -------------------------------------------------------------

inline std::size_t assign_cold(const CohortSet& set,
                               const OnboardingProfile& profile) {
  switch (set.recipe.cold_kind) {
    case ColdAssignKind::Value: {
      std::string value =
          cohort_detail::profile_value(profile, set.recipe.attribute);
      for (std::size_t i = 0; i < set.cohorts.size(); ++i)
        if (set.cohorts[i].value == value) return i;
      fail(ErrorKind::Assignment,
           "no cohort matches attribute value '" + value + "'");
    }
    case ColdAssignKind::Median: {
      double score =
          cohort_detail::required_score(profile, set.recipe.score_names.at(0));
      return score <= set.median ? 0 : 1;  // ties go to the low cohort
    }
    case ColdAssignKind::Centroid: {
      std::vector<double> raw;
      for (const auto& name : set.standardized_names)
        raw.push_back(cohort_detail::required_score(profile, name));
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < set.cohorts.size(); ++c) {
        double d = 0.0;
        for (std::size_t j = 0; j < raw.size(); ++j) {
          double z = (raw[j] - set.feature_means[j]) / set.feature_stds[j];
          double diff = z - set.cohorts[c].centroid[j];
          d += diff * diff;
        }
        if (d < best_dist) {
          best_dist = d;
          best = c;
        }
      }
      return best;
    }
  }
  fail(ErrorKind::Assignment, "unhandled cold assignment kind");
}

// Warm assignment: every cohort model predicts the m probe rows; the
// occupant goes to the best F1-micro (ties to the lowest cohort index).
inline std::size_t assign_warm(const CohortSet& set,
                               const TrainingMatrix& probe) {
  if (probe.n_rows() == 0)
    fail(ErrorKind::Parameter, "warm assignment needs a non-empty probe");
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t c = 0; c < set.cohorts.size(); ++c) {
    double score =
        f1_micro(probe.labels, set.cohorts[c].model.predict(probe));
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

// Ablation: the deliberately wrong assignment. Warm recipes take the
// worst-scoring cohort; 2-cohort cold recipes take the opposite side;
// centroid recipes take the farthest centroid.
inline std::size_t assign_worst_warm(const CohortSet& set,
                                     const TrainingMatrix& probe) {
  if (probe.n_rows() == 0)
    fail(ErrorKind::Parameter, "warm assignment needs a non-empty probe");
  std::size_t worst = 0;
  double worst_score = 2.0;
  for (std::size_t c = 0; c < set.cohorts.size(); ++c) {
    double score =
        f1_micro(probe.labels, set.cohorts[c].model.predict(probe));
    if (score < worst_score) {
      worst_score = score;
      worst = c;
    }
  }
  return worst;
}

inline std::size_t assign_worst_cold(const CohortSet& set,
                                     const OnboardingProfile& profile) {
  if (set.cohorts.size() == 2) return 1 - assign_cold(set, profile);
  if (set.recipe.cold_kind == ColdAssignKind::Centroid) {
    std::vector<double> raw;
    for (const auto& name : set.standardized_names)
      raw.push_back(cohort_detail::required_score(profile, name));
    std::size_t worst = 0;
    double worst_dist = -1.0;
    for (std::size_t c = 0; c < set.cohorts.size(); ++c) {
      double d = 0.0;
      for (std::size_t j = 0; j < raw.size(); ++j) {
        double z = (raw[j] - set.feature_means[j]) / set.feature_stds[j];
        double diff = z - set.cohorts[c].centroid[j];
        d += diff * diff;
      }
      if (d > worst_dist) {
        worst_dist = d;
        worst = c;
      }
    }
    return worst;
  }
  fail(ErrorKind::Parameter,
       "worst-assignment for cold recipes requires 2 cohorts");
}

}  // namespace ccm
