#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/csv.hpp"
#include "ccm/time.hpp"

namespace ccm {

// 3-class thermal preference with the fixed ordinal encoding -1/0/+1.
enum class ThermalPreference : int {
  PreferWarmer = -1,
  NoChange = 0,
  PreferCooler = 1,
};

constexpr int kNumClasses = 3;

// Class order used everywhere: (-1, 0, +1).
inline int class_index(ThermalPreference p) {
  return static_cast<int>(p) + 1;
}

inline ThermalPreference class_from_index(int idx) {
  return static_cast<ThermalPreference>(idx - 1);
}

inline ThermalPreference preference_from_int(int v,
                                             const std::string& context) {
  if (v < -1 || v > 1)
    fail(ErrorKind::Mapping,
         "label value " + std::to_string(v) + " outside {-1,0,1} (" +
             context + ")");
  return static_cast<ThermalPreference>(v);
}

enum class Sex { F, M };

inline Sex parse_sex(const std::string& raw, const std::string& context) {
  std::string v;
  for (char c : raw) v += static_cast<char>(std::tolower(c));
  if (v == "f" || v == "female" || v == "0") return Sex::F;
  if (v == "m" || v == "male" || v == "1") return Sex::M;
  fail(ErrorKind::Mapping, "cannot parse sex value '" + raw + "' (" +
                               context + ")");
}

inline std::string sex_to_string(Sex s) { return s == Sex::F ? "F" : "M"; }

// Big Five trait order is fixed for serialization and feature building.
inline const std::vector<std::string>& b5p_trait_names() {
  static const std::vector<std::string> names = {
      "extraversion", "agreeableness", "conscientiousness",
      "emotional_stability", "openness"};
  return names;
}

struct OnboardingProfile {
  std::string occupant_id;
  Sex sex = Sex::F;
  double height_cm = 0.0;
  double weight_kg = 0.0;
  std::optional<double> hsps_score;
  std::optional<double> swls_score;
  std::optional<std::map<std::string, double>> b5p_traits;

  void validate() const {
    if (!(height_cm > 100.0 && height_cm < 250.0))
      fail(ErrorKind::Mapping, "height " + std::to_string(height_cm) +
                                   " cm outside (100,250) for occupant " +
                                   occupant_id);
    if (!(weight_kg > 30.0 && weight_kg < 250.0))
      fail(ErrorKind::Mapping, "weight " + std::to_string(weight_kg) +
                                   " kg outside (30,250) for occupant " +
                                   occupant_id);
    if (b5p_traits) {
      for (const auto& name : b5p_trait_names())
        if (!b5p_traits->count(name))
          fail(ErrorKind::Schema,
               "b5p trait '" + name + "' missing for occupant " + occupant_id);
    }
  }

  // Survey score accessor by name ("hsps", "swls", or a b5p trait).
  std::optional<double> survey_score(const std::string& name) const {
    if (name == "hsps") return hsps_score;
    if (name == "swls") return swls_score;
    if (b5p_traits) {
      auto it = b5p_traits->find(name);
      if (it != b5p_traits->end()) return it->second;
    }
    return std::nullopt;
  }
};

// One RHRN response joined with its time-aligned sensor features. Feature
// values are stored aligned to the owning record's feature_names.
struct ObservationRow {
  std::string occupant_id;
  UnixSeconds timestamp = 0;
  std::vector<double> features;
  ThermalPreference label = ThermalPreference::NoChange;
};

struct OccupantRecord {
  OnboardingProfile profile;
  std::vector<std::string> feature_names;
  std::vector<ObservationRow> observations;

  void validate() const {
    UnixSeconds prev = std::numeric_limits<UnixSeconds>::min();
    for (const auto& row : observations) {
      if (row.occupant_id != profile.occupant_id)
        fail(ErrorKind::Schema, "observation occupant_id mismatch for " +
                                    profile.occupant_id);
      if (row.timestamp < prev)
        fail(ErrorKind::Schema,
             "observations not time-ordered for " + profile.occupant_id);
      if (row.features.size() != feature_names.size())
        fail(ErrorKind::Schema,
             "feature width mismatch for " + profile.occupant_id);
      prev = row.timestamp;
    }
  }

  std::size_t feature_index(const std::string& name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return i;
    fail(ErrorKind::Schema, "feature '" + name + "' not present for occupant " +
                                profile.occupant_id);
  }
};

// --- response distribution ----------------------------------------------

// Class-frequency vector over (-1, 0, +1); entries sum to 1.
inline std::array<double, kNumClasses> response_distribution(
    const OccupantRecord& record) {
  if (record.observations.empty())
    fail(ErrorKind::EmptyDataset,
         "occupant " + record.profile.occupant_id + " has no observations");
  std::array<double, kNumClasses> counts{0.0, 0.0, 0.0};
  for (const auto& row : record.observations)
    counts[class_index(row.label)] += 1.0;
  double n = static_cast<double>(record.observations.size());
  for (auto& c : counts) c /= n;
  return counts;
}

// --- participant-wise split ----------------------------------------------

struct ParticipantSplit {
  std::vector<std::size_t> train;  // indices into the input record list
  std::vector<std::size_t> test;
};

inline ParticipantSplit split_participants(std::size_t n_records,
                                           double train_ratio,
                                           std::uint64_t seed) {
  if (n_records < 2)
    fail(ErrorKind::Parameter, "need at least 2 occupants to split");
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    fail(ErrorKind::Parameter, "train_ratio must be in (0,1)");
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_ratio * static_cast<double>(n_records)));
  if (n_train == 0 || n_train == n_records)
    fail(ErrorKind::DegenerateSplit,
         "train ratio " + std::to_string(train_ratio) + " produces an empty side for " +
             std::to_string(n_records) + " occupants");
  std::vector<std::size_t> order(n_records);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  ParticipantSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// --- canonical dataset files ---------------------------------------------

// The canonical observation table: occupant_id, timestamp, features..., label.
inline void write_canonical_observations(
    const std::string& path, const std::vector<OccupantRecord>& records) {
  Table table;
  table.header = {"occupant_id", "timestamp"};
  if (!records.empty())
    table.header.insert(table.header.end(), records.front().feature_names.begin(),
                        records.front().feature_names.end());
  table.header.push_back("label");
  for (const auto& record : records) {
    for (const auto& row : record.observations) {
      std::vector<std::string> out;
      out.push_back(row.occupant_id);
      out.push_back(format_timestamp(row.timestamp));
      for (double v : row.features) out.push_back(format_double(v));
      out.push_back(std::to_string(static_cast<int>(row.label)));
      table.rows.push_back(std::move(out));
    }
  }
  write_csv(path, table);
}

inline void write_canonical_onboarding(
    const std::string& path, const std::vector<OccupantRecord>& records) {
  bool any = !records.empty();
  bool has_hsps = any && records.front().profile.hsps_score.has_value();
  bool has_swls = any && records.front().profile.swls_score.has_value();
  bool has_b5p = any && records.front().profile.b5p_traits.has_value();
  Table table;
  table.header = {"occupant_id", "sex", "height_cm", "weight_kg"};
  if (has_hsps) table.header.push_back("hsps");
  if (has_swls) table.header.push_back("swls");
  if (has_b5p)
    for (const auto& t : b5p_trait_names()) table.header.push_back("b5p_" + t);
  for (const auto& record : records) {
    const auto& p = record.profile;
    std::vector<std::string> row = {p.occupant_id, sex_to_string(p.sex),
                                    format_double(p.height_cm),
                                    format_double(p.weight_kg)};
    if (has_hsps) row.push_back(format_double(*p.hsps_score));
    if (has_swls) row.push_back(format_double(*p.swls_score));
    if (has_b5p)
      for (const auto& t : b5p_trait_names())
        row.push_back(format_double(p.b5p_traits->at(t)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

// Loads the canonical pair written by write_canonical_*; re-ingesting a
// canonical emission reproduces identical records.
inline std::vector<OccupantRecord> load_canonical(
    const std::string& observations_path, const std::string& onboarding_path) {
  Table obs = read_csv(observations_path);
  Table onb = read_csv(onboarding_path);

  std::size_t id_col = obs.column("occupant_id", observations_path);
  std::size_t ts_col = obs.column("timestamp", observations_path);
  std::size_t label_col = obs.column("label", observations_path);
  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < obs.header.size(); ++i) {
    if (i == id_col || i == ts_col || i == label_col) continue;
    feature_names.push_back(obs.header[i]);
    feature_cols.push_back(i);
  }

  std::size_t onb_id = onb.column("occupant_id", onboarding_path);
  std::size_t onb_sex = onb.column("sex", onboarding_path);
  std::size_t onb_h = onb.column("height_cm", onboarding_path);
  std::size_t onb_w = onb.column("weight_kg", onboarding_path);
  auto onb_hsps = onb.find_column("hsps");
  auto onb_swls = onb.find_column("swls");
  std::vector<std::optional<std::size_t>> onb_b5p;
  bool has_b5p = true;
  for (const auto& t : b5p_trait_names()) {
    onb_b5p.push_back(onb.find_column("b5p_" + t));
    has_b5p = has_b5p && onb_b5p.back().has_value();
  }

  std::vector<OccupantRecord> records;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < onb.rows.size(); ++r) {
    const auto& row = onb.rows[r];
    OccupantRecord record;
    record.feature_names = feature_names;
    auto& p = record.profile;
    p.occupant_id = row[onb_id];
    p.sex = parse_sex(row[onb_sex], onboarding_path);
    p.height_cm = parse_double(row[onb_h], "height_cm");
    p.weight_kg = parse_double(row[onb_w], "weight_kg");
    if (onb_hsps) p.hsps_score = parse_double(row[*onb_hsps], "hsps");
    if (onb_swls) p.swls_score = parse_double(row[*onb_swls], "swls");
    if (has_b5p) {
      std::map<std::string, double> traits;
      for (std::size_t t = 0; t < b5p_trait_names().size(); ++t)
        traits[b5p_trait_names()[t]] =
            parse_double(row[*onb_b5p[t]], "b5p trait");
      p.b5p_traits = std::move(traits);
    }
    p.validate();
    index[p.occupant_id] = records.size();
    records.push_back(std::move(record));
  }

  for (std::size_t r = 0; r < obs.rows.size(); ++r) {
    const auto& row = obs.rows[r];
    auto it = index.find(row[id_col]);
    if (it == index.end())
      fail(ErrorKind::Schema, "observation row " + std::to_string(r + 1) +
                                  " references unknown occupant '" +
                                  row[id_col] + "'");
    ObservationRow o;
    o.occupant_id = row[id_col];
    o.timestamp = parse_timestamp(row[ts_col], "row " + std::to_string(r + 1));
    for (std::size_t c : feature_cols)
      o.features.push_back(parse_double(row[c], obs.header[c]));
    int raw = static_cast<int>(
        parse_double(row[label_col], "label, row " + std::to_string(r + 1)));
    o.label = preference_from_int(raw, "row " + std::to_string(r + 1));
    records[it->second].observations.push_back(std::move(o));
  }

  for (auto& record : records) record.validate();
  if (records.empty())
    fail(ErrorKind::EmptyDataset, "no occupants in " + onboarding_path);
  return records;
}

}  // namespace ccm
