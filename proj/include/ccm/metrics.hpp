#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/data.hpp"

namespace ccm {

// Micro-averaged F1 over the three preference classes. With one label per
// row the micro aggregates collapse to accuracy, but the computation goes
// through the TP/FP/FN counts so the definition stays explicit.
inline double f1_micro(const std::vector<ThermalPreference>& y_true,
                       const std::vector<ThermalPreference>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    fail(ErrorKind::Metric,
         "f1_micro needs equal-length non-empty label vectors (got " +
             std::to_string(y_true.size()) + " and " +
             std::to_string(y_pred.size()) + ")");
  std::array<long, kNumClasses> tp{0, 0, 0}, fp{0, 0, 0}, fn{0, 0, 0};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = class_index(y_true[i]);
    int p = class_index(y_pred[i]);
    if (t == p) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  double tp_sum = 0, fp_sum = 0, fn_sum = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    tp_sum += tp[c];
    fp_sum += fp[c];
    fn_sum += fn[c];
  }
  double denom = tp_sum + 0.5 * (fp_sum + fn_sum);
  return denom == 0.0 ? 0.0 : tp_sum / denom;
}

// Percentile with linear interpolation between order statistics; the single
// convention used for IQR filtering and quartile reporting.
inline double percentile_linear(std::vector<double> values, double pct) {
  if (values.empty())
    fail(ErrorKind::Metric, "percentile of an empty list");
  std::sort(values.begin(), values.end());
  double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
  double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) {
  return percentile_linear(std::move(values), 50.0);
}

}  // namespace ccm
