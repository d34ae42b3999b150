#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/csv.hpp"
#include "ccm/data.hpp"
#include "ccm/ini.hpp"
#include "ccm/time.hpp"

namespace ccm {

struct FilterPredicate {
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge };
  std::string column;
  Op op = Op::Eq;
  std::string value;

  bool matches(const std::string& cell) const {
    // Numeric comparison when both sides parse as numbers, else string
    // equality (ordering ops require numbers).
    char* end = nullptr;
    double lhs = std::strtod(cell.c_str(), &end);
    bool lhs_num = end != cell.c_str() && *end == '\0';
    end = nullptr;
    double rhs = std::strtod(value.c_str(), &end);
    bool rhs_num = end != value.c_str() && *end == '\0';
    if (lhs_num && rhs_num) {
      switch (op) {
        case Op::Eq: return lhs == rhs;
        case Op::Ne: return lhs != rhs;
        case Op::Lt: return lhs < rhs;
        case Op::Le: return lhs <= rhs;
        case Op::Gt: return lhs > rhs;
        case Op::Ge: return lhs >= rhs;
      }
    }
    if (op == Op::Eq) return cell == value;
    if (op == Op::Ne) return cell != value;
    fail(ErrorKind::Config, "filter on column '" + column +
                                "' needs numeric operands for ordering ops");
  }
};

struct ScoreRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct DatasetSpec {
  std::string name;
  std::string id_column = "occupant_id";
  std::string timestamp_column = "timestamp";
  std::string label_column;
  std::map<std::string, int> label_mapping;  // raw cell -> {-1,0,1}
  std::vector<std::pair<std::string, std::string>> features;  // name -> column
  long truncation_n = 1;
  double alignment_tolerance_s = 300.0;
  std::vector<FilterPredicate> filters;

  // onboarding column mapping
  std::string onboarding_id_column;
  std::string sex_column = "sex";
  std::string height_column = "height_cm";
  std::string weight_column = "weight_kg";
  std::optional<std::string> hsps_column;
  std::optional<std::string> swls_column;
  std::map<std::string, std::string> b5p_columns;  // trait -> column
  std::map<std::string, ScoreRange> score_ranges;  // instrument -> range

  // optional categorical clothing -> clo lookup
  std::optional<std::string> clothing_feature;
  std::map<std::string, double> clothing_map;

  void validate() const {
    if (truncation_n < 1)
      fail(ErrorKind::Config, "truncation_n must be >= 1");
    if (!(alignment_tolerance_s > 0.0))
      fail(ErrorKind::Config, "alignment_tolerance_s must be > 0");
    if (label_column.empty())
      fail(ErrorKind::Config, "label_column is required");
    if (features.empty())
      fail(ErrorKind::Config, "at least one feature is required");
  }
};

namespace detail {

inline FilterPredicate parse_filter(const std::string& text,
                                    const std::string& context) {
  static const std::vector<std::pair<std::string, FilterPredicate::Op>> ops = {
      {"==", FilterPredicate::Op::Eq}, {"!=", FilterPredicate::Op::Ne},
      {"<=", FilterPredicate::Op::Le}, {">=", FilterPredicate::Op::Ge},
      {"<", FilterPredicate::Op::Lt},  {">", FilterPredicate::Op::Gt}};
  for (const auto& [tok, op] : ops) {
    auto pos = text.find(tok);
    if (pos == std::string::npos) continue;
    FilterPredicate p;
    p.column = IniFile::trim(text.substr(0, pos));
    p.op = op;
    p.value = IniFile::trim(text.substr(pos + tok.size()));
    if (p.column.empty() || p.value.empty())
      fail(ErrorKind::Config, "malformed filter '" + text + "' (" + context + ")");
    return p;
  }
  fail(ErrorKind::Config, "filter '" + text + "' has no comparison operator (" +
                              context + ")");
}

}  // namespace detail

inline DatasetSpec parse_dataset_spec(const IniFile& ini) {
  DatasetSpec spec;
  spec.name = ini.get_or("dataset", "name", "dataset");
  spec.id_column = ini.get_or("dataset", "id_column", spec.id_column);
  spec.timestamp_column =
      ini.get_or("dataset", "timestamp_column", spec.timestamp_column);
  spec.label_column = ini.get_required("dataset", "label_column");
  spec.truncation_n = ini.get_int("dataset", "truncation_n", 1);
  spec.alignment_tolerance_s =
      ini.get_double("dataset", "alignment_tolerance_s", 300.0);

  if (ini.has_section("labels")) {
    for (const auto& [raw, mapped] : ini.section("labels"))
      spec.label_mapping[raw] = static_cast<int>(
          parse_double(mapped, "[labels] " + raw));
  } else {
    spec.label_mapping = {{"-1", -1}, {"0", 0}, {"1", 1}};
  }

  for (const auto& [feature, column] : ini.section("features"))
    spec.features.emplace_back(feature, column);

  for (const auto& [key, value] : ini.section("filters")) {
    if (key != "keep")
      fail(ErrorKind::Config, "unknown [filters] key '" + key +
                                  "' (use keep = column OP value)");
    spec.filters.push_back(detail::parse_filter(value, ini.path()));
  }

  spec.onboarding_id_column =
      ini.get_or("onboarding", "id_column", spec.id_column);
  spec.sex_column = ini.get_or("onboarding", "sex_column", spec.sex_column);
  spec.height_column =
      ini.get_or("onboarding", "height_column", spec.height_column);
  spec.weight_column =
      ini.get_or("onboarding", "weight_column", spec.weight_column);
  if (auto v = ini.get("onboarding", "hsps_column")) spec.hsps_column = *v;
  if (auto v = ini.get("onboarding", "swls_column")) spec.swls_column = *v;
  for (const auto& trait : b5p_trait_names())
    if (auto v = ini.get("onboarding", "b5p_" + trait + "_column"))
      spec.b5p_columns[trait] = *v;
  if (!spec.b5p_columns.empty() &&
      spec.b5p_columns.size() != b5p_trait_names().size())
    fail(ErrorKind::Config,
         "either all five b5p_*_column keys must be present or none");
  for (const auto& instrument : {"hsps", "swls", "b5p"}) {
    if (auto v = ini.get("onboarding", std::string(instrument) + "_range")) {
      auto parts = split_list(*v, ':');
      if (parts.size() != 2)
        fail(ErrorKind::Config, "range must look like lo:hi, got '" + *v + "'");
      spec.score_ranges[instrument] = {parse_double(parts[0], "range lo"),
                                       parse_double(parts[1], "range hi")};
    }
  }

  if (auto v = ini.get("dataset", "clothing_feature")) {
    spec.clothing_feature = *v;
    for (const auto& [raw, clo] : ini.section("clothing_map"))
      spec.clothing_map[raw] = parse_double(clo, "[clothing_map] " + raw);
  }

  spec.validate();
  return spec;
}

struct IngestSummary {
  std::size_t survey_rows = 0;
  std::size_t rows_dropped_filters = 0;
  std::vector<std::pair<std::string, std::size_t>> rows_dropped_per_filter;
  std::size_t rows_dropped_missing_feature = 0;
  std::size_t occupants_seen = 0;
  std::size_t occupants_dropped_short = 0;   // fewer than truncation_n rows
  std::size_t occupants_dropped_no_profile = 0;
  std::size_t occupants_kept = 0;
};

namespace detail {

// One sorted (timestamp, value) series per occupant; the empty-string key
// holds a shared stream for sensor files without an occupant-id column.
struct SensorSeries {
  std::map<std::string, std::vector<std::pair<UnixSeconds, double>>> by_occupant;

  std::optional<double> nearest(const std::string& occupant_id, UnixSeconds t,
                                double tolerance_s) const {
    const std::vector<std::pair<UnixSeconds, double>>* series = nullptr;
    auto it = by_occupant.find(occupant_id);
    if (it != by_occupant.end()) series = &it->second;
    else {
      auto shared = by_occupant.find("");
      if (shared != by_occupant.end()) series = &shared->second;
    }
    if (!series || series->empty()) return std::nullopt;
    auto pos = std::lower_bound(
        series->begin(), series->end(), t,
        [](const std::pair<UnixSeconds, double>& a, UnixSeconds b) {
          return a.first < b;
        });
    std::optional<double> best;
    double best_dt = tolerance_s;
    if (pos != series->end()) {
      double dt = static_cast<double>(pos->first - t);
      if (dt <= best_dt) {
        best = pos->second;
        best_dt = dt;
      }
    }
    if (pos != series->begin()) {
      auto prev = std::prev(pos);
      double dt = static_cast<double>(t - prev->first);
      if (dt < best_dt || (dt <= best_dt && !best)) {
        best = prev->second;
      }
    }
    return best;
  }
};

inline std::optional<double> parse_feature_cell(const DatasetSpec& spec,
                                                const std::string& feature,
                                                const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  if (spec.clothing_feature && feature == *spec.clothing_feature) {
    auto it = spec.clothing_map.find(cell);
    if (it != spec.clothing_map.end()) return it->second;
  }
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') return std::nullopt;
  return v;
}

inline void check_score_range(const DatasetSpec& spec,
                              const std::string& instrument, double value,
                              const std::string& occupant_id) {
  auto it = spec.score_ranges.find(instrument);
  if (it == spec.score_ranges.end()) return;
  if (value < it->second.lo || value > it->second.hi)
    fail(ErrorKind::Mapping, instrument + " score " + std::to_string(value) +
                                 " outside declared range for occupant " +
                                 occupant_id);
}

}  // namespace detail

inline std::map<std::string, OnboardingProfile> load_onboarding(
    const DatasetSpec& spec, const std::string& onboarding_file) {
  Table onb = read_csv(onboarding_file);
  const std::string& id_name = spec.onboarding_id_column.empty()
                                   ? spec.id_column
                                   : spec.onboarding_id_column;
  std::size_t id_col = onb.column(id_name, onboarding_file);
  std::size_t sex_col = onb.column(spec.sex_column, onboarding_file);
  std::size_t h_col = onb.column(spec.height_column, onboarding_file);
  std::size_t w_col = onb.column(spec.weight_column, onboarding_file);
  std::optional<std::size_t> hsps_col, swls_col;
  if (spec.hsps_column)
    hsps_col = onb.column(*spec.hsps_column, onboarding_file);
  if (spec.swls_column)
    swls_col = onb.column(*spec.swls_column, onboarding_file);
  std::map<std::string, std::size_t> b5p_cols;
  for (const auto& [trait, column] : spec.b5p_columns)
    b5p_cols[trait] = onb.column(column, onboarding_file);

  std::map<std::string, OnboardingProfile> profiles;
  for (const auto& row : onb.rows) {
    OnboardingProfile p;
    p.occupant_id = row[id_col];
    p.sex = parse_sex(row[sex_col], onboarding_file);
    p.height_cm = parse_double(row[h_col], "height of " + p.occupant_id);
    p.weight_kg = parse_double(row[w_col], "weight of " + p.occupant_id);
    if (hsps_col) {
      p.hsps_score = parse_double(row[*hsps_col], "hsps of " + p.occupant_id);
      detail::check_score_range(spec, "hsps", *p.hsps_score, p.occupant_id);
    }
    if (swls_col) {
      p.swls_score = parse_double(row[*swls_col], "swls of " + p.occupant_id);
      detail::check_score_range(spec, "swls", *p.swls_score, p.occupant_id);
    }
    if (!b5p_cols.empty()) {
      std::map<std::string, double> traits;
      for (const auto& [trait, col] : b5p_cols) {
        traits[trait] =
            parse_double(row[col], "b5p " + trait + " of " + p.occupant_id);
        detail::check_score_range(spec, "b5p", traits[trait], p.occupant_id);
      }
      p.b5p_traits = std::move(traits);
    }
    p.validate();
    profiles[p.occupant_id] = std::move(p);
  }
  return profiles;
}

// Joins each RHRN survey row with the nearest-in-time sensor reading per
// feature (within the configured tolerance), applies filters, drops rows
// with any missing feature, and truncates every occupant to their first
// truncation_n rows. Occupants with fewer surviving rows are excluded.
inline std::vector<OccupantRecord> ingest(
    const DatasetSpec& spec, const std::string& survey_file,
    const std::vector<std::string>& sensor_files,
    const std::string& onboarding_file, IngestSummary* summary = nullptr) {
  IngestSummary local;
  IngestSummary& sum = summary ? *summary : local;

  Table survey = read_csv(survey_file);
  std::size_t id_col = survey.column(spec.id_column, survey_file);
  std::size_t ts_col = survey.column(spec.timestamp_column, survey_file);
  std::size_t label_col = survey.column(spec.label_column, survey_file);

  // Sensor tables, loaded up front so schema errors surface immediately.
  struct LoadedSensor {
    Table table;
    std::string path;
    std::optional<std::size_t> id_col;
    std::size_t ts_col = 0;
  };
  std::vector<LoadedSensor> sensors;
  for (const auto& path : sensor_files) {
    LoadedSensor s;
    s.table = read_csv(path);
    s.path = path;
    s.id_col = s.table.find_column(spec.id_column);
    s.ts_col = s.table.column(spec.timestamp_column, path);
    sensors.push_back(std::move(s));
  }

  // Resolve each feature to either a survey column or a sensor series.
  struct FeatureSource {
    std::string name;
    std::optional<std::size_t> survey_col;
    detail::SensorSeries series;  // used when survey_col is empty
  };
  std::vector<FeatureSource> sources;
  for (const auto& [feature, column] : spec.features) {
    FeatureSource src;
    src.name = feature;
    if (auto col = survey.find_column(column)) {
      src.survey_col = *col;
    } else {
      bool found = false;
      for (const auto& s : sensors) {
        auto col = s.table.find_column(column);
        if (!col) continue;
        found = true;
        for (const auto& row : s.table.rows) {
          auto value = detail::parse_feature_cell(spec, feature, (*col < row.size()) ? row[*col] : "");
          if (!value) continue;
          std::string key = s.id_col ? row[*s.id_col] : std::string();
          src.series.by_occupant[key].emplace_back(
              parse_timestamp(row[s.ts_col], s.path), *value);
        }
        break;
      }
      if (!found)
        fail(ErrorKind::Schema, "column '" + column + "' for feature '" +
                                    feature +
                                    "' not found in the survey file or any "
                                    "sensor file");
      for (auto& [key, series] : src.series.by_occupant)
        std::sort(series.begin(), series.end());
    }
    sources.push_back(std::move(src));
  }

  // Filter columns must exist in the survey table.
  std::vector<std::size_t> filter_cols;
  for (const auto& f : spec.filters)
    filter_cols.push_back(survey.column(f.column, survey_file));

  auto profiles = load_onboarding(spec, onboarding_file);

  std::map<std::string, std::vector<ObservationRow>> rows_by_occupant;
  sum.survey_rows = survey.rows.size();
  for (const auto& f : spec.filters)
    sum.rows_dropped_per_filter.emplace_back(
        f.column + " " +
            std::string(f.op == FilterPredicate::Op::Eq   ? "=="
                        : f.op == FilterPredicate::Op::Ne ? "!="
                        : f.op == FilterPredicate::Op::Lt ? "<"
                        : f.op == FilterPredicate::Op::Le ? "<="
                        : f.op == FilterPredicate::Op::Gt ? ">"
                                                          : ">=") +
            " " + f.value,
        0);
  for (std::size_t r = 0; r < survey.rows.size(); ++r) {
    const auto& row = survey.rows[r];
    bool keep = true;
    for (std::size_t f = 0; f < spec.filters.size(); ++f) {
      if (!spec.filters[f].matches(row[filter_cols[f]])) {
        keep = false;
        ++sum.rows_dropped_per_filter[f].second;  // first failing filter
        break;
      }
    }
    if (!keep) {
      ++sum.rows_dropped_filters;
      continue;
    }
    ObservationRow obs;
    obs.occupant_id = row[id_col];
    obs.timestamp =
        parse_timestamp(row[ts_col], "survey row " + std::to_string(r + 1));
    auto mapped = spec.label_mapping.find(row[label_col]);
    if (mapped == spec.label_mapping.end())
      fail(ErrorKind::Mapping, "label value '" + row[label_col] +
                                   "' has no mapping (survey row " +
                                   std::to_string(r + 1) + ")");
    obs.label = preference_from_int(mapped->second,
                                    "survey row " + std::to_string(r + 1));
    bool complete = true;
    for (const auto& src : sources) {
      std::optional<double> value;
      if (src.survey_col) {
        value = detail::parse_feature_cell(spec, src.name, row[*src.survey_col]);
      } else {
        value = src.series.nearest(obs.occupant_id, obs.timestamp,
                                   spec.alignment_tolerance_s);
      }
      if (!value) {
        complete = false;
        break;
      }
      obs.features.push_back(*value);
    }
    if (!complete) {
      ++sum.rows_dropped_missing_feature;
      continue;
    }
    rows_by_occupant[obs.occupant_id].push_back(std::move(obs));
  }

  std::vector<std::string> feature_names;
  for (const auto& [feature, column] : spec.features)
    feature_names.push_back(feature);

  std::vector<OccupantRecord> records;
  sum.occupants_seen = rows_by_occupant.size();
  for (auto& [occupant_id, rows] : rows_by_occupant) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ObservationRow& a, const ObservationRow& b) {
                       return a.timestamp < b.timestamp;
                     });
    if (rows.size() < static_cast<std::size_t>(spec.truncation_n)) {
      ++sum.occupants_dropped_short;
      continue;
    }
    auto profile = profiles.find(occupant_id);
    if (profile == profiles.end()) {
      log_warn("occupant " + occupant_id +
               " has survey rows but no onboarding row; dropped");
      ++sum.occupants_dropped_no_profile;
      continue;
    }
    OccupantRecord record;
    record.profile = profile->second;
    record.feature_names = feature_names;
    rows.resize(static_cast<std::size_t>(spec.truncation_n));
    record.observations = std::move(rows);
    record.validate();
    records.push_back(std::move(record));
  }
  sum.occupants_kept = records.size();

  if (records.empty())
    fail(ErrorKind::EmptyDataset,
         "no occupants survived ingestion for dataset '" + spec.name + "'");

  // Dataset-level homogeneity of optional onboarding fields.
  for (const auto& record : records) {
    const auto& first = records.front().profile;
    const auto& p = record.profile;
    if (p.hsps_score.has_value() != first.hsps_score.has_value() ||
        p.swls_score.has_value() != first.swls_score.has_value() ||
        p.b5p_traits.has_value() != first.b5p_traits.has_value())
      fail(ErrorKind::Schema,
           "optional onboarding fields must be present for every occupant or "
           "none (occupant " + p.occupant_id + " differs)");
  }
  return records;
}

}  // namespace ccm
