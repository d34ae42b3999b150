#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/data.hpp"
#include "ccm/ini.hpp"

namespace ccm {

// One planted occupant type: a thermal comfort band (temperatures inside it
// label NoChange, below PreferWarmer, above PreferCooler) plus per-score
// normal distributions for the onboarding surveys.
struct TypeDefinition {
  double band_lo_c = 21.0;
  double band_hi_c = 25.0;
  std::map<std::string, std::pair<double, double>> score_distributions;

  double band_center() const { return 0.5 * (band_lo_c + band_hi_c); }
};

struct PopulationSpec {
  int n_occupants = 20;
  int n_types = 2;
  int rows_per_occupant = 100;
  std::vector<TypeDefinition> type_definitions;
  double label_noise = 0.1;
  double temp_lo_c = 18.0;
  double temp_hi_c = 32.0;
  // per-occupant shift applied to both band edges; stresses the gap between
  // personal and cohort models without moving occupants across types
  double band_jitter_c = 0.75;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_types < 2) fail(ErrorKind::Parameter, "n_types must be >= 2");
    if (n_occupants < n_types)
      fail(ErrorKind::Parameter, "need at least one occupant per type");
    if (rows_per_occupant < 1)
      fail(ErrorKind::Parameter, "rows_per_occupant must be >= 1");
    if (label_noise < 0.0 || label_noise >= 0.5)
      fail(ErrorKind::Parameter, "label_noise must be in [0, 0.5)");
    if (static_cast<int>(type_definitions.size()) != n_types)
      fail(ErrorKind::Parameter, "one type definition per type is required");
    for (std::size_t i = 0; i < type_definitions.size(); ++i)
      for (std::size_t j = i + 1; j < type_definitions.size(); ++j)
        if (std::abs(type_definitions[i].band_center() -
                     type_definitions[j].band_center()) < 2.0)
          fail(ErrorKind::Parameter,
               "comfort-band centers of distinct types must differ by >= 2 degC");
  }
};

// Balanced two-type default used across the test suites.
inline PopulationSpec default_population_spec(std::uint64_t seed,
                                              int n_occupants = 20,
                                              int rows = 100,
                                              double label_noise = 0.1) {
  PopulationSpec spec;
  spec.seed = seed;
  spec.n_occupants = n_occupants;
  spec.rows_per_occupant = rows;
  spec.label_noise = label_noise;

  TypeDefinition cool_runner;  // comfortable when it is cool
  cool_runner.band_lo_c = 21.0;
  cool_runner.band_hi_c = 25.0;
  cool_runner.score_distributions = {
      {"hsps", {3.0, 0.5}},          {"swls", {18.0, 2.0}},
      {"extraversion", {3.2, 0.6}},  {"agreeableness", {4.0, 0.6}},
      {"conscientiousness", {4.5, 0.6}}, {"emotional_stability", {3.8, 0.6}},
      {"openness", {4.2, 0.6}}};

  TypeDefinition warm_runner;
  warm_runner.band_lo_c = 25.0;
  warm_runner.band_hi_c = 29.0;
  warm_runner.score_distributions = {
      {"hsps", {5.4, 0.5}},          {"swls", {27.0, 2.0}},
      {"extraversion", {5.0, 0.6}},  {"agreeableness", {5.6, 0.6}},
      {"conscientiousness", {3.0, 0.6}}, {"emotional_stability", {5.2, 0.6}},
      {"openness", {3.0, 0.6}}};

  spec.type_definitions = {cool_runner, warm_runner};
  return spec;
}

inline const std::vector<std::string>& synth_feature_names() {
  static const std::vector<std::string> names = {
      "air_temperature_c", "relative_humidity_pct", "near_body_temp_c",
      "heart_rate_bpm", "clothing_clo"};
  return names;
}

struct SyntheticPopulation {
  std::vector<OccupantRecord> records;
  std::vector<int> type_labels;  // parallel to records
};

// Deterministic generator: every occupant derives an independent RNG from
// (spec.seed, occupant index). Physiological features are temperature-
// correlated decoys; only the temperature/label relation carries the type.
inline SyntheticPopulation generate(const PopulationSpec& spec) {
  spec.validate();
  SyntheticPopulation population;

  // near-even type assignment, shuffled under the spec seed
  std::vector<int> types(static_cast<std::size_t>(spec.n_occupants));
  for (std::size_t i = 0; i < types.size(); ++i)
    types[i] = static_cast<int>(i) % spec.n_types;
  std::mt19937_64 type_rng(derive_seed(spec.seed, 0x7970e5ull));
  std::shuffle(types.begin(), types.end(), type_rng);

  for (int i = 0; i < spec.n_occupants; ++i) {
    std::mt19937_64 rng(derive_seed(spec.seed, 0x0cc0ull,
                                    static_cast<std::uint64_t>(i)));
    const TypeDefinition& type =
        spec.type_definitions[static_cast<std::size_t>(types[static_cast<std::size_t>(i)])];

    OccupantRecord record;
    auto& profile = record.profile;
    char id[16];
    std::snprintf(id, sizeof(id), "occ%03d", i);
    profile.occupant_id = id;
    std::uniform_int_distribution<int> coin(0, 1);
    profile.sex = coin(rng) == 0 ? Sex::F : Sex::M;
    std::normal_distribution<double> height(168.0, 8.0), weight(65.0, 12.0);
    profile.height_cm = std::clamp(height(rng), 110.0, 240.0);
    profile.weight_kg = std::clamp(weight(rng), 35.0, 240.0);

    std::map<std::string, double> traits;
    for (const auto& [score, dist] : type.score_distributions) {
      std::normal_distribution<double> draw(dist.first, dist.second);
      double value = draw(rng);
      if (score == "hsps") profile.hsps_score = value;
      else if (score == "swls") profile.swls_score = value;
      else traits[score] = value;
    }
    if (!traits.empty()) {
      for (const auto& t : b5p_trait_names())
        if (!traits.count(t)) traits[t] = 4.0;  // neutral default
      profile.b5p_traits = std::move(traits);
    }

    std::uniform_real_distribution<double> jitter(-spec.band_jitter_c,
                                                  spec.band_jitter_c);
    double shift = jitter(rng);
    double band_lo = type.band_lo_c + shift;
    double band_hi = type.band_hi_c + shift;

    record.feature_names = synth_feature_names();
    std::uniform_real_distribution<double> temp(spec.temp_lo_c, spec.temp_hi_c);
    std::uniform_real_distribution<double> rh(40.0, 60.0);
    std::normal_distribution<double> near_body_noise(0.0, 0.6);
    std::normal_distribution<double> hr_noise(0.0, 4.0);
    std::normal_distribution<double> clo_noise(0.5, 0.05);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < spec.rows_per_occupant; ++r) {
      ObservationRow row;
      row.occupant_id = profile.occupant_id;
      row.timestamp = 1672531200 + static_cast<UnixSeconds>(r) * 3600;
      double t = temp(rng);
      row.features = {t, rh(rng), 0.35 * t + 22.0 + near_body_noise(rng),
                      72.0 + 0.4 * (t - 25.0) + hr_noise(rng),
                      std::clamp(clo_noise(rng), 0.3, 0.8)};
      int label = t < band_lo ? -1 : (t > band_hi ? 1 : 0);
      if (spec.label_noise > 0.0 && unit(rng) < spec.label_noise) {
        int shift_by = coin(rng) + 1;  // one of the two other classes
        label = ((label + 1 + shift_by) % 3) - 1;
      }
      row.label = preference_from_int(label, "synthetic row");
      record.observations.push_back(std::move(row));
    }
    record.validate();
    population.records.push_back(std::move(record));
    population.type_labels.push_back(types[static_cast<std::size_t>(i)]);
  }
  return population;
}

// Parses the [population] / [type.N] spec file consumed by the CLI.
inline PopulationSpec parse_population_spec(const IniFile& ini) {
  PopulationSpec spec = default_population_spec(0);
  spec.n_occupants =
      static_cast<int>(ini.get_int("population", "n_occupants", 20));
  spec.n_types = static_cast<int>(ini.get_int("population", "n_types", 2));
  spec.rows_per_occupant =
      static_cast<int>(ini.get_int("population", "rows_per_occupant", 100));
  spec.label_noise = ini.get_double("population", "label_noise", 0.1);
  spec.band_jitter_c = ini.get_double("population", "band_jitter_c", 0.75);
  spec.seed = static_cast<std::uint64_t>(ini.get_int("population", "seed", 0));
  if (auto range = ini.get("population", "temp_range")) {
    auto parts = split_list(*range, ':');
    if (parts.size() != 2)
      fail(ErrorKind::Config, "temp_range must look like lo:hi");
    spec.temp_lo_c = parse_double(parts[0], "temp_range lo");
    spec.temp_hi_c = parse_double(parts[1], "temp_range hi");
  }

  std::vector<TypeDefinition> types;
  for (int t = 0;; ++t) {
    std::string section = "type." + std::to_string(t);
    if (!ini.has_section(section)) break;
    TypeDefinition def;
    auto band = ini.get_required(section, "band");
    auto parts = split_list(band, ':');
    if (parts.size() != 2)
      fail(ErrorKind::Config, "band must look like lo:hi");
    def.band_lo_c = parse_double(parts[0], "band lo");
    def.band_hi_c = parse_double(parts[1], "band hi");
    for (const auto& [key, value] : ini.section(section)) {
      if (key == "band") continue;
      auto ms = split_list(value, ':');
      if (ms.size() != 2)
        fail(ErrorKind::Config, "score '" + key + "' must look like mean:std");
      def.score_distributions[key] = {parse_double(ms[0], key + " mean"),
                                      parse_double(ms[1], key + " std")};
    }
    types.push_back(std::move(def));
  }
  if (!types.empty()) spec.type_definitions = std::move(types);
  if (static_cast<int>(spec.type_definitions.size()) != spec.n_types) {
    // scale the default two-type layout when more types are requested
    if (spec.type_definitions.size() == 2 && spec.n_types > 2) {
      std::vector<TypeDefinition> scaled;
      for (int t = 0; t < spec.n_types; ++t) {
        TypeDefinition def = spec.type_definitions[t % 2];
        double offset = 4.0 * std::floor(t / 2.0);
        def.band_lo_c += offset;
        def.band_hi_c += offset;
        scaled.push_back(def);
      }
      spec.type_definitions = std::move(scaled);
    }
  }
  spec.validate();
  return spec;
}

inline void write_type_table(const std::string& path,
                             const SyntheticPopulation& population) {
  Table table;
  table.header = {"occupant_id", "type"};
  for (std::size_t i = 0; i < population.records.size(); ++i)
    table.rows.push_back({population.records[i].profile.occupant_id,
                          std::to_string(population.type_labels[i])});
  write_csv(path, table);
}

}  // namespace ccm
