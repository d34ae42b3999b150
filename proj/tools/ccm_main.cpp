// Command-line front end: ingest raw survey/sensor tables, build cohort
// sets, run the evaluation protocol, and generate synthetic populations.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ccm/ccm.hpp"

namespace {

void ensure_parent_dir(const std::string& path_prefix) {
  std::filesystem::path parent =
      std::filesystem::path(path_prefix).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec)
    ccm::fail(ccm::ErrorKind::Io,
              "cannot create directory " + parent.string());
}

int exit_code_for(const ccm::Error& e) {
  switch (e.kind()) {
    case ccm::ErrorKind::Schema:
    case ccm::ErrorKind::Mapping:
    case ccm::ErrorKind::EmptyDataset:
    case ccm::ErrorKind::Io:
    case ccm::ErrorKind::Parameter:
      return 2;
    case ccm::ErrorKind::Config:
    case ccm::ErrorKind::DegenerateSplit:  // recipe cannot be built on this data
      return 3;
    default:
      return 4;
  }
}

struct IngestArgs {
  std::string config;
  std::vector<std::string> sensors;
  std::string survey;
  std::string onboarding;
  std::string out;
};

int cmd_ingest(const IngestArgs& args) {
  ccm::IniFile ini = ccm::IniFile::load(args.config);
  ccm::DatasetSpec spec = ccm::parse_dataset_spec(ini);

  std::string survey = args.survey.empty()
                           ? ini.get_required("dataset", "survey_file")
                           : args.survey;
  std::string onboarding = args.onboarding.empty()
                               ? ini.get_required("dataset", "onboarding_file")
                               : args.onboarding;
  std::vector<std::string> sensors = args.sensors;
  if (sensors.empty())
    sensors = ini.values("dataset", "sensor_file");

  ccm::IngestSummary summary;
  auto records = ccm::ingest(spec, survey, sensors, onboarding, &summary);
  ensure_parent_dir(args.out);
  ccm::write_canonical_observations(args.out + ".csv", records);
  ccm::write_canonical_onboarding(args.out + ".onboarding.csv", records);

  std::cout << "dataset: " << spec.name << "\n"
            << "occupants kept: " << summary.occupants_kept << " (of "
            << summary.occupants_seen << " with surviving rows)\n"
            << "occupants dropped (fewer than " << spec.truncation_n
            << " rows): " << summary.occupants_dropped_short << "\n"
            << "occupants dropped (no onboarding row): "
            << summary.occupants_dropped_no_profile << "\n"
            << "survey rows read: " << summary.survey_rows << "\n"
            << "rows dropped by filters: " << summary.rows_dropped_filters
            << "\n";
  for (const auto& [filter, dropped] : summary.rows_dropped_per_filter)
    std::cout << "  " << filter << ": " << dropped << "\n";
  std::cout << "rows dropped missing a feature: "
            << summary.rows_dropped_missing_feature << "\n"
            << "rows per kept occupant: " << spec.truncation_n << "\n"
            << "wrote " << args.out << ".csv and " << args.out
            << ".onboarding.csv\n";
  return 0;
}

struct CohortArgs {
  std::string data;
  std::string recipe;
  std::vector<std::string> params;
  std::uint64_t seed = 0;
  std::string out;
  bool full_grid = false;
};

int cmd_cohorts(const CohortArgs& args) {
  std::map<std::string, std::string> params;
  for (const auto& kv : args.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      ccm::fail(ccm::ErrorKind::Parameter,
                "--params entries must look like key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }

  double alpha = params.count("alpha") ? std::stod(params["alpha"]) : 0.5;
  ccm::CohortRecipe recipe = ccm::recipe_by_name(args.recipe, alpha);
  if (params.count("k_lo")) recipe.k_lo = std::stoi(params["k_lo"]);
  if (params.count("k_hi")) recipe.k_hi = std::stoi(params["k_hi"]);

  auto records = ccm::load_canonical(args.data + ".csv",
                                     args.data + ".onboarding.csv");
  std::vector<const ccm::OccupantRecord*> pointers;
  for (const auto& r : records) pointers.push_back(&r);

  ccm::ModelTrainConfig train_config;
  train_config.grid = args.full_grid ? ccm::full_grid() : ccm::desk_grid();
  train_config.seed = args.seed;

  std::map<std::string, ccm::FittedForest> pcms;
  std::map<std::string, const ccm::FittedForest*> pcm_ptrs;
  if (recipe.start_type == ccm::StartType::Warm) {
    for (const auto* r : pointers) {
      const std::string& id = r->profile.occupant_id;
      ccm::log_info("training PCM for " + id);
      pcms.emplace(id, ccm::train_pcm(*r, train_config.grid, train_config.folds,
                                      ccm::derive_seed(args.seed,
                                                       ccm::hash_string(id))));
    }
    for (const auto& [id, forest] : pcms) pcm_ptrs[id] = &forest;
  }

  ccm::WarmBuildTrace trace;
  ccm::CohortSet set = ccm::build_recipe(recipe, pointers, pcm_ptrs, args.seed,
                                         train_config, &trace);
  ccm::save_cohort_set(set, args.out);
  if (recipe.start_type == ccm::StartType::Warm) {
    ccm::save_affinity(trace.blended, args.out + "/affinity.csv",
                       recipe.weights.alpha, recipe.weights.beta, 0.0,
                       trace.distribution_mu);
  }
  std::cout << "recipe: " << set.recipe.name << "\n"
            << "cohorts: " << set.k << "\n";
  for (std::size_t c = 0; c < set.cohorts.size(); ++c)
    std::cout << "  cohort " << c << ": " << set.cohorts[c].member_ids.size()
              << " members\n";
  std::cout << "wrote cohort set to " << args.out << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string config;
  int workers = 1;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& args) {
  ccm::IniFile ini = ccm::IniFile::load(args.config);
  ccm::ExperimentFile file = ccm::parse_experiment_config(ini);
  file.config.workers = args.workers;

  auto records =
      ccm::load_canonical(file.observations_path, file.onboarding_path);

  std::error_code ec;
  std::filesystem::create_directories(args.out, ec);
  if (ec) ccm::fail(ccm::ErrorKind::Io, "cannot create " + args.out);

  ccm::EvaluationReport report;
  ccm::EvaluationReport partial;
  try {
    report = ccm::run_experiment(file.config, records, &partial);
  } catch (const std::exception& e) {
    // keep whatever iterations finished next to a FAILED marker
    if (!partial.rows.empty()) {
      std::ofstream results(args.out + "/results.csv");
      results << ccm::results_to_csv(partial);
    }
    std::ofstream marker(args.out + "/FAILED");
    marker << e.what() << "\n";
    throw;
  }
  ccm::save_report(report, args.out);
  ccm::write_run_manifest(args.out, args.config, file.config.base_seed,
                          {"results.csv", "summary.json"});
  std::cout << "wrote " << args.out << "/results.csv, summary.json, "
            << "manifest.json\n";
  return 0;
}

struct SynthArgs {
  std::string spec;
  std::string out;
};

int cmd_synth(const SynthArgs& args) {
  ccm::PopulationSpec spec = args.spec.empty()
                                 ? ccm::default_population_spec(0)
                                 : ccm::parse_population_spec(
                                       ccm::IniFile::load(args.spec));
  ccm::SyntheticPopulation population = ccm::generate(spec);
  ensure_parent_dir(args.out);
  ccm::write_canonical_observations(args.out + ".csv", population.records);
  ccm::write_canonical_onboarding(args.out + ".onboarding.csv",
                                  population.records);
  ccm::write_type_table(args.out + ".types.csv", population);
  std::cout << "generated " << population.records.size() << " occupants x "
            << spec.rows_per_occupant << " rows (" << spec.n_types
            << " planted types)\n"
            << "wrote " << args.out << ".csv, .onboarding.csv, .types.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cohort comfort models: similarity-based thermal preference "
               "prediction"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "Ingest raw survey/sensor tables into the canonical format");
  ingest->add_option("--config", ingest_args.config, "dataset config file")
      ->required();
  ingest->add_option("--survey", ingest_args.survey,
                     "survey table (overrides config)");
  ingest->add_option("--sensor", ingest_args.sensors,
                     "sensor table (repeatable; overrides config)");
  ingest->add_option("--onboarding", ingest_args.onboarding,
                     "onboarding table (overrides config)");
  ingest->add_option("--out", ingest_args.out, "output path prefix")
      ->required();

  CohortArgs cohort_args;
  auto* cohorts = app.add_subcommand(
      "cohorts", "Build one cohort approach from a canonical dataset");
  cohorts->add_option("--data", cohort_args.data, "canonical dataset prefix")
      ->required();
  cohorts->add_option("--recipe", cohort_args.recipe,
                      "sex|surveys|sensitive|life-satisfaction|personality|"
                      "agreeableness|dist-cross|cross")
      ->required();
  cohorts->add_option("--params", cohort_args.params,
                      "recipe parameters as key=value");
  cohorts->add_option("--seed", cohort_args.seed, "random seed");
  cohorts->add_flag("--full-grid", cohort_args.full_grid,
                    "use the full 270-point hyperparameter grid");
  cohorts->add_option("--out", cohort_args.out, "output directory")
      ->required();

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Run the repeated split/build/assign/score protocol");
  evaluate->add_option("--config", evaluate_args.config,
                       "experiment config file")
      ->required();
  evaluate->add_option("--workers", evaluate_args.workers,
                       "parallel iteration workers");
  evaluate->add_option("--out", evaluate_args.out, "output directory")
      ->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic population with planted cohorts");
  synth->add_option("--spec", synth_args.spec,
                    "population spec file (defaults to the built-in 2-type "
                    "population)");
  synth->add_option("--out", synth_args.out, "output path prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(ingest_args);
    if (*cohorts) return cmd_cohorts(cohort_args);
    if (*evaluate) return cmd_evaluate(evaluate_args);
    if (*synth) return cmd_synth(synth_args);
  } catch (const ccm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
