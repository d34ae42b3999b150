#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/cv.hpp"
#include "ccm/data.hpp"
#include "ccm/metrics.hpp"

namespace ccm {

struct PmvInputs {
  double air_temp_c = 25.0;
  double mean_radiant_temp_c = 25.0;
  double air_velocity_ms = 0.1;
  double relative_humidity_pct = 50.0;
  double met = 1.1;
  double clo = 0.5;

  void validate() const {
    if (air_velocity_ms < 0.0)
      fail(ErrorKind::Parameter, "air velocity must be >= 0");
    if (met <= 0.0) fail(ErrorKind::Parameter, "metabolic rate must be > 0");
    if (clo < 0.0) fail(ErrorKind::Parameter, "clothing insulation must be >= 0");
    if (relative_humidity_pct < 0.0 || relative_humidity_pct > 100.0)
      fail(ErrorKind::Parameter, "relative humidity must be in [0,100]");
  }
};

struct PmvClassThresholds {
  double cool_above = 1.5;   // PMV above this -> prefer cooler
  double warm_below = -1.5;  // PMV below this -> prefer warmer

  void validate() const {
    if (!(warm_below < cool_above))
      fail(ErrorKind::Parameter, "warm_below must be less than cool_above");
  }
};

// ISO 7730 heat-balance PMV. The clothing surface temperature is solved by
// damped fixed-point iteration (tolerance 1e-5 degC, at most 150 steps) with
// the convective coefficient taken as max(natural, forced). The returned
// index is clamped to the reporting range [-3.5, 3.5].
inline double pmv(const PmvInputs& in) {
  in.validate();

  // water vapour pressure in Pa from the saturation correlation
  const double pa = in.relative_humidity_pct * 10.0 *
                    std::exp(16.6536 - 4030.183 / (in.air_temp_c + 235.0));

  const double icl = 0.155 * in.clo;       // m2 K / W
  const double m = in.met * 58.15;         // W / m2
  const double mw = m;                     // no external work
  const double fcl =
      icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hcf = 12.1 * std::sqrt(in.air_velocity_ms);  // forced
  const double taa = in.air_temp_c + 273.0;
  const double tra = in.mean_radiant_temp_c + 273.0;

  // fixed-point iteration on the clothing surface temperature, expressed
  // in hundreds of kelvin as in the standard's reference listing
  double tcla = taa + (35.5 - in.air_temp_c) / (3.5 * icl + 0.1);
  const double p1 = icl * fcl;
  const double p2 = p1 * 3.96;
  const double p3 = p1 * 100.0;
  const double p4 = p1 * taa;
  const double p5 = 308.7 - 0.028 * mw + p2 * std::pow(tra / 100.0, 4);

  double xn = tcla / 100.0;
  double xf = tcla / 50.0;
  const double eps = 1e-7;  // 1e-5 degC on the clothing temperature
  double hc = hcf;
  int iterations = 0;
  while (std::abs(xn - xf) > eps) {
    if (++iterations > 150)
      fail(ErrorKind::Numerical,
           "PMV clothing-temperature iteration did not converge (last tcl=" +
               std::to_string(100.0 * xn - 273.0) + " degC)");
    xf = 0.5 * (xf + xn);
    const double hcn = 2.38 * std::pow(std::abs(100.0 * xf - taa), 0.25);
    hc = std::max(hcf, hcn);
    xn = (p5 + p4 * hc - p2 * std::pow(xf, 4)) / (100.0 + p3 * hc);
  }
  const double tcl = 100.0 * xn - 273.0;

  const double hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);    // skin diffusion
  const double hl2 = mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0; // sweating
  const double hl3 = 1.7e-5 * m * (5867.0 - pa);             // latent respiration
  const double hl4 = 0.0014 * m * (34.0 - in.air_temp_c);    // dry respiration
  const double hl5 =
      3.96 * fcl * (std::pow(xn, 4) - std::pow(tra / 100.0, 4));  // radiation
  const double hl6 = fcl * hc * (tcl - in.air_temp_c);            // convection

  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  const double value = ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
  return std::clamp(value, -3.5, 3.5);
}

// |PMV| <= cool_above (and >= warm_below) is "no change"; beyond the bounds
// the vote maps to the preference the occupant would express.
inline ThermalPreference pmv_to_preference(double value,
                                           PmvClassThresholds thresholds = {}) {
  thresholds.validate();
  if (value > thresholds.cool_above) return ThermalPreference::PreferCooler;
  if (value < thresholds.warm_below) return ThermalPreference::PreferWarmer;
  return ThermalPreference::NoChange;
}

// Which dataset features feed the PMV computation, plus the static values
// used when a quantity is not measured.
struct PmvFeatureMap {
  std::string air_temp_feature = "air_temperature_c";
  std::string rh_feature = "relative_humidity_pct";
  std::string clo_feature = "clothing_clo";
  std::optional<std::string> radiant_feature;   // defaults to air temperature
  std::optional<std::string> velocity_feature;  // defaults to static value
  std::optional<std::string> met_feature;       // defaults to static value
  double static_air_velocity_ms = 0.1;
  double static_met = 1.1;
  PmvClassThresholds thresholds;
};

// Per-occupant F1-micro of the PMV baseline over each occupant's rows.
inline std::map<std::string, double> pmv_baseline(
    const std::vector<const OccupantRecord*>& records,
    const PmvFeatureMap& map) {
  std::map<std::string, double> scores;
  for (const auto* record : records) {
    std::size_t ta = record->feature_index(map.air_temp_feature);
    std::size_t rh = record->feature_index(map.rh_feature);
    std::size_t clo = record->feature_index(map.clo_feature);
    std::optional<std::size_t> tr, vel, met;
    if (map.radiant_feature) tr = record->feature_index(*map.radiant_feature);
    if (map.velocity_feature)
      vel = record->feature_index(*map.velocity_feature);
    if (map.met_feature) met = record->feature_index(*map.met_feature);

    std::vector<ThermalPreference> y_true, y_pred;
    for (const auto& row : record->observations) {
      PmvInputs in;
      in.air_temp_c = row.features[ta];
      in.relative_humidity_pct = row.features[rh];
      in.clo = row.features[clo];
      in.mean_radiant_temp_c = tr ? row.features[*tr] : in.air_temp_c;
      in.air_velocity_ms = vel ? row.features[*vel] : map.static_air_velocity_ms;
      in.met = met ? row.features[*met] : map.static_met;
      y_true.push_back(row.label);
      y_pred.push_back(pmv_to_preference(pmv(in), map.thresholds));
    }
    scores[record->profile.occupant_id] = f1_micro(y_true, y_pred);
  }
  return scores;
}

}  // namespace ccm
