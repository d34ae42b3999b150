#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ccm/cohort.hpp"
#include "ccm/cohort_io.hpp"
#include "ccm/cv.hpp"
#include "ccm/eval.hpp"
#include "ccm/synth.hpp"
#include "helpers.hpp"

using namespace ccm;
using test_helpers::adjusted_rand_index;

namespace {

ModelTrainConfig fast_config(std::uint64_t seed) {
  ModelTrainConfig config;
  RfHyperparams p;
  p.n_trees = 30;
  p.max_depth = 6;
  config.grid = {p};
  config.seed = seed;
  return config;
}

std::vector<const OccupantRecord*> pointers(
    const std::vector<OccupantRecord>& records) {
  std::vector<const OccupantRecord*> out;
  for (const auto& r : records) out.push_back(&r);
  return out;
}

std::map<std::string, FittedForest> train_pcms(
    const std::vector<const OccupantRecord*>& records, std::uint64_t seed) {
  std::map<std::string, FittedForest> pcms;
  for (const auto* r : records) {
    TrainingMatrix data = build_matrix(*r, false);
    RfHyperparams params;
    params.n_trees = 30;
    params.max_depth = 6;
    params.seed = derive_seed(seed, hash_string(r->profile.occupant_id));
    pcms.emplace(r->profile.occupant_id, fit_forest(data, params));
  }
  return pcms;
}

std::map<std::string, const FittedForest*> as_ptrs(
    const std::map<std::string, FittedForest>& pcms) {
  std::map<std::string, const FittedForest*> out;
  for (const auto& [id, f] : pcms) out[id] = &f;
  return out;
}

FittedForest constant_forest(int cls) {
  FittedForest forest;
  forest.feature_names = {"x"};
  forest.class_totals = {1, 1, 1};
  rf_detail::Tree tree;
  rf_detail::Node node;
  node.counts = {cls == -1 ? 1u : 0u, cls == 0 ? 1u : 0u, cls == 1 ? 1u : 0u};
  tree.nodes.push_back(node);
  forest.trees.push_back(tree);
  return forest;
}

TrainingMatrix probe_with_labels(const std::vector<int>& labels) {
  TrainingMatrix m;
  m.feature_names = {"x"};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m.values.push_back(0.0);
    m.labels.push_back(preference_from_int(labels[i], "test"));
  }
  return m;
}

}  // namespace

TEST_CASE("sex cohorts split by the categorical value") {
  auto population = generate(default_population_spec(3, 12, 25));
  auto records = pointers(population.records);
  CohortSet set = build_cold_value(records, "sex", fast_config(1));
  REQUIRE(set.k == 2);
  REQUIRE(set.cohorts[0].value == "F");
  REQUIRE(set.cohorts[1].value == "M");

  std::size_t total = 0;
  for (const auto& cohort : set.cohorts) total += cohort.member_ids.size();
  REQUIRE(total == records.size());

  // assigning any training member's own profile returns its cohort
  for (const auto* r : records) {
    std::size_t idx = assign_cold(set, r->profile);
    const auto& members = set.cohorts[idx].member_ids;
    REQUIRE(std::find(members.begin(), members.end(),
                      r->profile.occupant_id) != members.end());
    // the ablation picks the opposite side
    REQUIRE(assign_worst_cold(set, r->profile) == 1 - idx);
  }
}

TEST_CASE("single-valued attributes cannot form cohorts") {
  auto population = generate(default_population_spec(5, 8, 20));
  for (auto& record : population.records) record.profile.sex = Sex::F;
  auto records = pointers(population.records);
  REQUIRE_THROWS_AS(build_cold_value(records, "sex", fast_config(1)), Error);
}

TEST_CASE("median cohorts split scores at the median") {
  auto population = generate(default_population_spec(7, 4, 30));
  std::vector<double> scores = {1, 2, 3, 4};
  for (std::size_t i = 0; i < population.records.size(); ++i)
    population.records[i].profile.hsps_score = scores[i];
  auto records = pointers(population.records);

  CohortSet set =
      build_cold_median(records, "hsps", /*iqr_filter=*/false, fast_config(2));
  REQUIRE(set.median == Catch::Approx(2.5));
  REQUIRE(set.cohorts[0].member_ids.size() == 2);  // scores 1 and 2
  REQUIRE(set.cohorts[1].member_ids.size() == 2);  // scores 3 and 4

  // a profile at the stored median lands in the low cohort
  OnboardingProfile probe = population.records[0].profile;
  probe.hsps_score = 2.5;
  REQUIRE(assign_cold(set, probe) == 0);
  probe.hsps_score = 2.51;
  REQUIRE(assign_cold(set, probe) == 1);
}

TEST_CASE("IQR filtering retains half of distinct scores") {
  auto population = generate(default_population_spec(9, 20, 25));
  for (std::size_t i = 0; i < population.records.size(); ++i)
    population.records[i].profile.swls_score = static_cast<double>(i + 1);
  auto records = pointers(population.records);

  CohortSet set =
      build_cold_median(records, "swls", /*iqr_filter=*/true, fast_config(3));
  std::size_t retained =
      set.cohorts[0].member_ids.size() + set.cohorts[1].member_ids.size();
  REQUIRE(retained == 10);  // 50% of 20 occupants

  // filtered-out (middle) occupants are still assignable
  for (const auto* r : records) {
    std::size_t idx = assign_cold(set, r->profile);
    REQUIRE((idx == 0 || idx == 1));
  }
}

TEST_CASE("identical scores cannot form a median split") {
  auto population = generate(default_population_spec(11, 6, 20));
  for (auto& record : population.records) record.profile.hsps_score = 4.0;
  auto records = pointers(population.records);
  REQUIRE_THROWS_AS(
      build_cold_median(records, "hsps", false, fast_config(4)), Error);
}

TEST_CASE("data-driven cold cohorts recover planted survey blobs") {
  auto population = generate(default_population_spec(13, 16, 25));
  auto records = pointers(population.records);
  CohortSet set = build_cold_datadriven(records, {"hsps", "swls"}, 2, 5, 17,
                                        fast_config(5));
  REQUIRE(set.k == 2);
  REQUIRE(set.k_trace.has_value());
  REQUIRE(set.k_trace->chosen_k == 2);

  // cohorts align with the planted types
  std::map<std::string, int> truth;
  for (std::size_t i = 0; i < population.records.size(); ++i)
    truth[population.records[i].profile.occupant_id] =
        population.type_labels[i];
  std::vector<int> planted, assigned;
  for (std::size_t c = 0; c < set.cohorts.size(); ++c)
    for (const auto& id : set.cohorts[c].member_ids) {
      planted.push_back(truth.at(id));
      assigned.push_back(static_cast<int>(c));
    }
  REQUIRE(adjusted_rand_index(planted, assigned) >= 0.9);

  // profiles equal to a stored centroid resolve to that cohort, and
  // members' own profiles mostly return home
  int consistent = 0;
  for (const auto* r : records) {
    std::size_t idx = assign_cold(set, r->profile);
    const auto& members = set.cohorts[idx].member_ids;
    if (std::find(members.begin(), members.end(), r->profile.occupant_id) !=
        members.end())
      ++consistent;
  }
  REQUIRE(consistent >= static_cast<int>(0.9 * records.size()));
}

TEST_CASE("surveys and personality recipes use the documented score sets") {
  CohortRecipe surveys = recipe_by_name("surveys");
  REQUIRE(surveys.score_names.size() == 7);  // hsps + swls + 5 traits
  CohortRecipe personality = recipe_by_name("personality");
  REQUIRE(personality.score_names == b5p_trait_names());
  CohortRecipe agree = recipe_by_name("agreeableness");
  REQUIRE(agree.score_names == std::vector<std::string>{"agreeableness"});
  REQUIRE_FALSE(agree.iqr_filter);
  CohortRecipe sensitive = recipe_by_name("sensitive");
  REQUIRE(sensitive.iqr_filter);
  REQUIRE_THROWS_AS(recipe_by_name("nonsense"), Error);
}

TEST_CASE("warm cohorts recover the planted types") {
  auto population = generate(default_population_spec(19, 20, 60));
  auto records = pointers(population.records);
  auto pcms = train_pcms(records, 23);
  auto ptrs = as_ptrs(pcms);

  CohortSet set = build_warm(records, ptrs, BlendWeights(0.5, 0.5), 2, 10, 29,
                             fast_config(6));
  REQUIRE(set.k == 2);

  std::map<std::string, int> truth;
  for (std::size_t i = 0; i < population.records.size(); ++i)
    truth[population.records[i].profile.occupant_id] =
        population.type_labels[i];
  std::vector<int> planted, assigned;
  for (std::size_t c = 0; c < set.cohorts.size(); ++c)
    for (const auto& id : set.cohorts[c].member_ids) {
      planted.push_back(truth.at(id));
      assigned.push_back(static_cast<int>(c));
    }
  REQUIRE(adjusted_rand_index(planted, assigned) >= 0.9);

  // membership partitions the training occupants and models train on
  // exactly the union of member rows
  std::set<std::string> seen;
  std::size_t rows = 0;
  for (const auto& cohort : set.cohorts)
    for (const auto& id : cohort.member_ids) {
      REQUIRE(seen.insert(id).second);
      rows += 60;
    }
  REQUIRE(seen.size() == records.size());
  REQUIRE(set.training_row_count == rows);

  // warm assignment with an occupant's full rows returns its own cohort
  // for a clear majority of members
  int home = 0;
  for (const auto* r : records) {
    TrainingMatrix full = build_matrix(*r, /*include_onboarding=*/true);
    std::size_t idx = assign_warm(set, full);
    const auto& members = set.cohorts[idx].member_ids;
    if (std::find(members.begin(), members.end(), r->profile.occupant_id) !=
        members.end())
      ++home;
  }
  REQUIRE(home >= static_cast<int>(0.8 * records.size()));

  // deliberate misassignment costs at least 0.1 mean F1 on planted data
  double best_sum = 0.0, worst_sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [probe_idx, rest_idx] = eval_detail::draw_probe(
        *records[i], 3, derive_seed(55, static_cast<std::uint64_t>(i)));
    TrainingMatrix probe = build_matrix_rows(*records[i], probe_idx, true);
    TrainingMatrix rest = build_matrix_rows(*records[i], rest_idx, true);
    std::size_t best = assign_warm(set, probe);
    std::size_t worst = assign_worst_warm(set, probe);
    best_sum += f1_micro(rest.labels, set.cohorts[best].model.predict(rest));
    worst_sum += f1_micro(rest.labels, set.cohorts[worst].model.predict(rest));
  }
  REQUIRE(best_sum / records.size() >= worst_sum / records.size() + 0.1);
}

TEST_CASE("cross recipe is the alpha=1 blend") {
  CohortRecipe cross = recipe_by_name("cross");
  REQUIRE(cross.weights.alpha == 1.0);
  REQUIRE(cross.weights.beta == 0.0);
  CohortRecipe dist_cross = recipe_by_name("dist-cross", 0.5);
  REQUIRE(dist_cross.weights.alpha == Catch::Approx(0.5));
}

TEST_CASE("warm assignment picks argmax and worst picks argmin") {
  CohortSet set;
  set.recipe.start_type = StartType::Warm;
  set.k = 3;
  for (int cls : {0, -1, 1}) {
    Cohort cohort;
    cohort.model = constant_forest(cls);
    cohort.member_ids = {"m" + std::to_string(cls)};
    set.cohorts.push_back(std::move(cohort));
  }
  // labels: 9 zeros, 2 warmer, 5 cooler -> scores (0.5625, 0.125, 0.3125)
  std::vector<int> labels(9, 0);
  labels.insert(labels.end(), {-1, -1, 1, 1, 1, 1, 1});
  TrainingMatrix probe = probe_with_labels(labels);
  REQUIRE(assign_warm(set, probe) == 0);
  REQUIRE(assign_worst_warm(set, probe) == 1);

  // single cohort always wins
  CohortSet solo;
  solo.k = 1;
  Cohort only;
  only.model = constant_forest(0);
  solo.cohorts.push_back(std::move(only));
  REQUIRE(assign_warm(solo, probe) == 0);

  REQUIRE_THROWS_AS(assign_warm(set, probe_with_labels({})), Error);
}

TEST_CASE("worst differs from best whenever probe scores are not tied") {
  CohortSet set;
  set.recipe.start_type = StartType::Warm;
  set.k = 2;
  for (int cls : {0, 1}) {
    Cohort cohort;
    cohort.model = constant_forest(cls);
    set.cohorts.push_back(std::move(cohort));
  }
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i)
      labels.push_back(static_cast<int>(rng() % 3) - 1);
    TrainingMatrix probe = probe_with_labels(labels);
    double s0 = f1_micro(probe.labels, set.cohorts[0].model.predict(probe));
    double s1 = f1_micro(probe.labels, set.cohorts[1].model.predict(probe));
    std::size_t best = assign_warm(set, probe);
    std::size_t worst = assign_worst_warm(set, probe);
    if (s0 != s1) {
      REQUIRE(best != worst);
    } else {
      REQUIRE(best == 0);
      REQUIRE(worst == 0);
    }
  }
}

TEST_CASE("unseen categorical values cannot be assigned") {
  auto population = generate(default_population_spec(31, 8, 20));
  auto records = pointers(population.records);
  CohortSet set = build_cold_value(records, "sex", fast_config(7));
  // both sexes occur in training, so the error path needs a synthetic kind
  CohortSet crippled = set;
  crippled.cohorts.pop_back();
  OnboardingProfile male = population.records.front().profile;
  male.sex = Sex::M;
  REQUIRE_THROWS_AS(assign_cold(crippled, male), Error);
}

TEST_CASE("cohort sets round-trip through their directory format") {
  auto population = generate(default_population_spec(37, 12, 25));
  auto records = pointers(population.records);
  CohortSet set = build_cold_datadriven(records, {"hsps", "swls"}, 2, 4, 43,
                                        fast_config(8));
  test_helpers::TempDir dir;
  save_cohort_set(set, dir.file("cohorts"));
  CohortSet loaded = load_cohort_set(dir.file("cohorts"));

  REQUIRE(loaded.k == set.k);
  REQUIRE(loaded.recipe.cold_kind == set.recipe.cold_kind);
  REQUIRE(loaded.standardized_names == set.standardized_names);
  for (std::size_t c = 0; c < set.cohorts.size(); ++c) {
    REQUIRE(loaded.cohorts[c].member_ids == set.cohorts[c].member_ids);
    REQUIRE(loaded.cohorts[c].centroid == set.cohorts[c].centroid);
  }
  // assignments agree after the round trip
  for (const auto* r : records)
    REQUIRE(assign_cold(loaded, r->profile) == assign_cold(set, r->profile));
}
