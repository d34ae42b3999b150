#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/data.hpp"

namespace ccm {

struct RfHyperparams {
  int n_trees = 100;
  int max_depth = 10;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  // split criterion is always Gini
  std::uint64_t seed = 0;

  void validate() const {
    if (n_trees < 1) fail(ErrorKind::Parameter, "n_trees must be >= 1");
    if (max_depth < 1 || max_depth > 64)
      fail(ErrorKind::Parameter, "max_depth must be in [1,64]");
    if (min_samples_split < 2)
      fail(ErrorKind::Parameter, "min_samples_split must be >= 2");
    if (min_samples_leaf < 1)
      fail(ErrorKind::Parameter, "min_samples_leaf must be >= 1");
  }

  bool operator==(const RfHyperparams& o) const {
    return n_trees == o.n_trees && max_depth == o.max_depth &&
           min_samples_split == o.min_samples_split &&
           min_samples_leaf == o.min_samples_leaf;
  }
};

// Flat training design: rows x features, plus one label per row.
struct TrainingMatrix {
  std::vector<std::string> feature_names;
  std::vector<double> values;  // row-major, stride = feature_names.size()
  std::vector<ThermalPreference> labels;

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  const double* row(std::size_t r) const {
    return values.data() + r * n_features();
  }
};

namespace rf_detail {

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::uint32_t, kNumClasses> counts{0, 0, 0};
};

// Deterministic class pick: max count, ties to the class with the larger
// training-set total, then to NoChange, then to the smaller ordinal.
inline int resolve_class(const std::array<double, kNumClasses>& votes,
                         const std::array<std::uint64_t, kNumClasses>& totals) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (votes[c] > votes[best]) {
      best = c;
      continue;
    }
    if (votes[c] < votes[best]) continue;
    if (totals[c] > totals[best]) {
      best = c;
      continue;
    }
    if (totals[c] < totals[best]) continue;
    constexpr int no_change = 1;  // class index of NoChange
    if (c == no_change && best != no_change) best = c;
  }
  return best;
}

class Tree {
public:
  std::vector<Node> nodes;

  int predict_index(const double* x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
      node = x[nodes[node].feature] <= nodes[node].threshold
                 ? nodes[node].left
                 : nodes[node].right;
    }
    return node;
  }
};

struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double weighted_gini = 0.0;
};

inline double gini(const std::array<std::uint32_t, kNumClasses>& counts,
                   double total) {
  double g = 1.0;
  for (int c = 0; c < kNumClasses; ++c) {
    double p = counts[c] / total;
    g -= p * p;
  }
  return g;
}

class TreeBuilder {
public:
  TreeBuilder(const TrainingMatrix& data, const RfHyperparams& params,
              std::size_t mtry)
      : data_(data), params_(params), mtry_(mtry) {}

  Tree build(std::vector<std::uint32_t>& sample_indices,
             std::uint64_t tree_seed) {
    Tree tree;
    grow(tree, sample_indices, 0, sample_indices.size(), 0, tree_seed);
    return tree;
  }

private:
  // Feature-subset seeds are derived per node from the parent's seed, not
  // from traversal order, so a deeper tree extends a shallower one instead
  // of reshuffling it.
  void grow(Tree& tree, std::vector<std::uint32_t>& idx, std::size_t begin,
            std::size_t end, int depth, std::uint64_t node_seed) {
    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::array<std::uint32_t, kNumClasses> counts{0, 0, 0};
    for (std::size_t i = begin; i < end; ++i)
      ++counts[class_index(data_.labels[idx[i]])];
    tree.nodes[node_id].counts = counts;

    std::size_t n = end - begin;
    bool pure = false;
    for (int c = 0; c < kNumClasses; ++c)
      if (counts[c] == n) pure = true;
    if (depth >= params_.max_depth || pure ||
        n < static_cast<std::size_t>(params_.min_samples_split))
      return;

    SplitCandidate best = find_split(idx, begin, end, counts, node_seed);
    if (!best.valid) return;

    auto mid_it = std::stable_partition(
        idx.begin() + begin, idx.begin() + end, [&](std::uint32_t r) {
          return data_.row(r)[best.feature] <= best.threshold;
        });
    std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());
    if (mid == begin || mid == end) return;  // degenerate partition, keep leaf

    tree.nodes[node_id].feature = best.feature;
    tree.nodes[node_id].threshold = best.threshold;
    std::uint64_t left_seed = derive_seed(node_seed, 0x6c656674ull);
    std::uint64_t right_seed = derive_seed(node_seed, 0x72696774ull);
    tree.nodes[node_id].left = static_cast<int>(tree.nodes.size());
    grow(tree, idx, begin, mid, depth + 1, left_seed);
    tree.nodes[node_id].right = static_cast<int>(tree.nodes.size());
    grow(tree, idx, mid, end, depth + 1, right_seed);
  }

  SplitCandidate find_split(const std::vector<std::uint32_t>& idx,
                            std::size_t begin, std::size_t end,
                            const std::array<std::uint32_t, kNumClasses>& counts,
                            std::uint64_t node_seed) {
    std::size_t n = end - begin;
    std::size_t p = data_.n_features();

    // Partial Fisher-Yates draw of mtry distinct features.
    std::vector<int> feats(p);
    std::iota(feats.begin(), feats.end(), 0);
    std::mt19937_64 rng(node_seed);
    for (std::size_t i = 0; i < mtry_ && i + 1 < p; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, p - 1);
      std::swap(feats[i], feats[pick(rng)]);
    }

    SplitCandidate best;
    std::vector<std::pair<double, int>> column(n);  // (value, class)
    const std::size_t min_leaf =
        static_cast<std::size_t>(params_.min_samples_leaf);
    for (std::size_t f = 0; f < mtry_ && f < p; ++f) {
      int feature = feats[f];
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t r = idx[begin + i];
        column[i] = {data_.row(r)[feature], class_index(data_.labels[r])};
      }
      std::sort(column.begin(), column.end());
      std::array<std::uint32_t, kNumClasses> left{0, 0, 0};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[column[i].second];
        if (column[i].first == column[i + 1].first) continue;
        std::size_t n_left = i + 1;
        std::size_t n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        std::array<std::uint32_t, kNumClasses> right;
        for (int c = 0; c < kNumClasses; ++c) right[c] = counts[c] - left[c];
        double weighted =
            (n_left * gini(left, static_cast<double>(n_left)) +
             n_right * gini(right, static_cast<double>(n_right))) /
            static_cast<double>(n);
        if (!best.valid || weighted < best.weighted_gini) {
          double lo = column[i].first;
          double hi = column[i + 1].first;
          double threshold = lo + 0.5 * (hi - lo);
          // Midpoints can round up to hi when the gap is tiny; fall back to
          // the left value so the <= partition matches the scanned counts.
          if (!(threshold < hi)) threshold = lo;
          best.valid = true;
          best.feature = feature;
          best.threshold = threshold;
          best.weighted_gini = weighted;
        }
      }
    }
    return best;
  }

  const TrainingMatrix& data_;
  const RfHyperparams& params_;
  std::size_t mtry_;
};

}  // namespace rf_detail

class FittedForest {
public:
  std::vector<rf_detail::Tree> trees;
  std::vector<std::string> feature_names;
  std::array<std::uint64_t, kNumClasses> class_totals{0, 0, 0};
  RfHyperparams hyperparams;

  ThermalPreference predict_row(const double* x) const {
    std::array<double, kNumClasses> votes{0.0, 0.0, 0.0};
    for (const auto& tree : trees) {
      int leaf = tree.predict_index(x);
      const auto& counts = tree.nodes[leaf].counts;
      std::array<double, kNumClasses> leaf_votes{
          static_cast<double>(counts[0]), static_cast<double>(counts[1]),
          static_cast<double>(counts[2])};
      votes[rf_detail::resolve_class(leaf_votes, class_totals)] += 1.0;
    }
    return class_from_index(rf_detail::resolve_class(votes, class_totals));
  }

  std::vector<ThermalPreference> predict(const TrainingMatrix& rows) const {
    if (rows.feature_names != feature_names)
      fail(ErrorKind::Schema,
           "prediction rows do not carry the forest's feature set");
    std::vector<ThermalPreference> out;
    out.reserve(rows.n_rows());
    for (std::size_t r = 0; r < rows.n_rows(); ++r)
      out.push_back(predict_row(rows.row(r)));
    return out;
  }
};

// Fits n_trees Gini-split trees on bootstrap resamples (with replacement,
// resample size = |rows|); each split considers a random ceil(sqrt(p))
// feature subset. Deterministic under params.seed.
inline FittedForest fit_forest(const TrainingMatrix& data,
                               const RfHyperparams& params,
                               bool bootstrap = true) {
  params.validate();
  if (data.n_rows() == 0)
    fail(ErrorKind::InsufficientData, "cannot fit a forest on zero rows");
  if (data.n_features() == 0)
    fail(ErrorKind::Schema, "cannot fit a forest with zero features");

  FittedForest forest;
  forest.feature_names = data.feature_names;
  forest.hyperparams = params;
  for (auto label : data.labels)
    ++forest.class_totals[class_index(label)];

  std::size_t mtry = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(data.n_features()))));
  rf_detail::TreeBuilder builder(data, params, mtry);
  std::size_t n = data.n_rows();
  forest.trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    std::uint64_t tree_seed =
        derive_seed(params.seed, static_cast<std::uint64_t>(t));
    std::vector<std::uint32_t> sample(n);
    if (bootstrap) {
      std::mt19937_64 rng(derive_seed(tree_seed, 0xb007ull));
      std::uniform_int_distribution<std::uint32_t> pick(
          0, static_cast<std::uint32_t>(n - 1));
      for (auto& s : sample) s = pick(rng);
    } else {
      std::iota(sample.begin(), sample.end(), 0u);
    }
    forest.trees.push_back(
        builder.build(sample, derive_seed(tree_seed, 0x677277ull)));
  }
  return forest;
}

}  // namespace ccm
