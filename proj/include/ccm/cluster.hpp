#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/data.hpp"
#include "ccm/similarity.hpp"

namespace ccm {

struct ClusterAssignment {
  std::vector<std::string> occupant_ids;
  std::vector<int> labels;
  int k = 0;

  void validate() const {
    if (labels.size() != occupant_ids.size())
      fail(ErrorKind::Schema, "cluster label count mismatch");
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int label : labels) {
      if (label < 0 || label >= k)
        fail(ErrorKind::Degenerate, "cluster label out of range");
      ++sizes[static_cast<std::size_t>(label)];
    }
    for (int s : sizes)
      if (s == 0) fail(ErrorKind::Degenerate, "empty cluster in assignment");
  }
};

struct KSelectionTrace {
  std::vector<int> candidate_ks;
  std::map<int, double> mean_silhouettes;
  int chosen_k = 0;
};

namespace cluster_detail {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
  bool has_empty = true;
};

inline KMeansResult kmeans_once(const Eigen::MatrixXd& points, int k,
                                std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();

  // k-means++ seeding
  Eigen::MatrixXd centers(k, d);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = points.row(first(rng));
  Eigen::VectorXd dist_sq =
      (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = dist_sq.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist_sq(i);
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);  // all points coincide with chosen centers
    }
    centers.row(c) = points.row(chosen);
    dist_sq = dist_sq.cwiseMin(
        (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  constexpr int kMaxIters = 300;
  constexpr double kTol = 1e-8;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        double dsq = (points.row(i) - centers.row(c)).squaredNorm();
        if (dsq < best) {
          best = dsq;
          best_c = c;
        }
      }
      labels[static_cast<std::size_t>(i)] = best_c;
    }
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, d);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;  // keep old center
      next.row(c) /= counts[static_cast<std::size_t>(c)];
      shift += (next.row(c) - centers.row(c)).squaredNorm();
      centers.row(c) = next.row(c);
    }
    if (shift < kTol) break;
  }

  KMeansResult result;
  result.labels = labels;
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    inertia +=
        (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)]))
            .squaredNorm();
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  result.inertia = inertia;
  result.has_empty =
      std::any_of(counts.begin(), counts.end(), [](int c) { return c == 0; });
  return result;
}

// Best-of-restarts k-means; restarts with re-derived seeds when every run
// of a batch leaves a cluster empty.
inline std::vector<int> kmeans(const Eigen::MatrixXd& points, int k,
                               std::uint64_t seed, int restarts = 100,
                               int reseed_attempts = 20) {
  for (int attempt = 0; attempt < reseed_attempts; ++attempt) {
    KMeansResult best;
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    for (int r = 0; r < restarts; ++r) {
      KMeansResult run = kmeans_once(points, k, rng);
      if (run.has_empty) continue;
      if (run.inertia < best.inertia || best.has_empty) best = run;
    }
    if (!best.has_empty) return best.labels;
  }
  fail(ErrorKind::Degenerate,
       "k-means could not produce " + std::to_string(k) +
           " non-empty clusters after reseeding");
}

}  // namespace cluster_detail

struct SpectralResult {
  ClusterAssignment assignment;
  Eigen::MatrixXd embedding;  // row-normalized eigenvector block (q x k)
};

// Ng-Jordan-Weiss style spectral clustering: normalized symmetric Laplacian
// L = I - D^{-1/2} A D^{-1/2}, embedding from the k eigenvectors with the
// smallest eigenvalues, rows normalized to unit length, then seeded k-means.
inline SpectralResult spectral_cluster_full(const AffinityMatrix& affinity,
                                            int k, std::uint64_t seed) {
  const auto q = static_cast<Eigen::Index>(affinity.size());
  if (k < 2 || k > static_cast<int>(q) - 1)
    fail(ErrorKind::Parameter,
         "k must satisfy 2 <= k <= q-1 (k=" + std::to_string(k) +
             ", q=" + std::to_string(q) + ")");
  affinity.validate();

  Eigen::VectorXd degree = affinity.values.rowwise().sum();
  Eigen::VectorXd inv_sqrt(q);
  for (Eigen::Index i = 0; i < q; ++i)
    inv_sqrt(i) = 1.0 / std::sqrt(degree(i));  // degree >= 1 (unit diagonal)
  Eigen::MatrixXd laplacian =
      Eigen::MatrixXd::Identity(q, q) -
      inv_sqrt.asDiagonal() * affinity.values * inv_sqrt.asDiagonal();
  // symmetrize against rounding before the eigensolver
  laplacian = 0.5 * (laplacian + laplacian.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success)
    fail(ErrorKind::Numerical, "eigendecomposition of the Laplacian failed");

  // eigenvalues come back ascending; take the first k eigenvectors
  Eigen::MatrixXd embedding = solver.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < q; ++i) {
    double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }

  SpectralResult result;
  result.embedding = embedding;
  result.assignment.occupant_ids = affinity.occupant_ids;
  result.assignment.k = k;
  result.assignment.labels = cluster_detail::kmeans(embedding, k, seed);
  result.assignment.validate();
  return result;
}

inline ClusterAssignment spectral_cluster(const AffinityMatrix& affinity,
                                          int k, std::uint64_t seed) {
  return spectral_cluster_full(affinity, k, seed).assignment;
}

// --- survey-score clustering (cold start) ---------------------------------

struct StandardizedFeatures {
  std::vector<std::string> occupant_ids;
  std::vector<std::string> feature_names;  // zero-variance features dropped
  Eigen::MatrixXd values;                  // standardized, q x d
  std::vector<double> means;               // per kept feature
  std::vector<double> stds;

  Eigen::RowVectorXd standardize(const std::vector<double>& raw) const {
    if (raw.size() != means.size())
      fail(ErrorKind::Parameter, "feature width mismatch in standardize");
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i)
      out(static_cast<Eigen::Index>(i)) = (raw[i] - means[i]) / stds[i];
    return out;
  }
};

inline StandardizedFeatures standardize_scores(
    const std::vector<const OnboardingProfile*>& profiles,
    const std::vector<std::string>& score_names) {
  const std::size_t q = profiles.size();
  StandardizedFeatures out;
  for (const auto* p : profiles) out.occupant_ids.push_back(p->occupant_id);

  std::vector<std::vector<double>> columns;
  for (const auto& name : score_names) {
    std::vector<double> column;
    for (const auto* p : profiles) {
      auto v = p->survey_score(name);
      if (!v)
        fail(ErrorKind::Config, "occupant " + p->occupant_id +
                                    " lacks survey score '" + name + "'");
      column.push_back(*v);
    }
    double mean = std::accumulate(column.begin(), column.end(), 0.0) / q;
    double var = 0.0;
    for (double v : column) var += (v - mean) * (v - mean);
    var /= q;
    double sd = std::sqrt(var);
    if (sd == 0.0) {
      log_warn("survey score '" + name + "' has zero variance; dropped");
      continue;
    }
    out.feature_names.push_back(name);
    out.means.push_back(mean);
    out.stds.push_back(sd);
    columns.push_back(std::move(column));
  }
  if (out.feature_names.empty())
    fail(ErrorKind::Config,
         "all requested survey scores have zero variance");

  out.values.resize(static_cast<Eigen::Index>(q),
                    static_cast<Eigen::Index>(out.feature_names.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (std::size_t i = 0; i < q; ++i)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (columns[j][i] - out.means[j]) / out.stds[j];
  return out;
}

// Affinity from standardized score vectors: pairwise Euclidean distances
// pushed through the same kernel as the divergence path (c = 0, mu = std of
// the pairwise distances).
inline AffinityMatrix feature_affinity(const StandardizedFeatures& features) {
  const Eigen::Index q = features.values.rows();
  if (q < 2)
    fail(ErrorKind::Parameter, "feature affinity needs at least two profiles");
  Eigen::MatrixXd distances = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = i + 1; j < q; ++j) {
      double d = (features.values.row(i) - features.values.row(j)).norm();
      distances(i, j) = d;
      distances(j, i) = d;
    }
  AffinityMatrix m;
  m.kind = AffinityKind::Distribution;
  m.occupant_ids = features.occupant_ids;
  m.values = rbf_normalize(distances, 0.0);
  m.validate();
  return m;
}

struct FeatureClusterResult {
  ClusterAssignment assignment;
  StandardizedFeatures features;
  Eigen::MatrixXd embedding;
};

inline FeatureClusterResult feature_spectral_cluster(
    const std::vector<const OnboardingProfile*>& profiles,
    const std::vector<std::string>& score_names, int k, std::uint64_t seed) {
  FeatureClusterResult result;
  result.features = standardize_scores(profiles, score_names);
  AffinityMatrix affinity = feature_affinity(result.features);
  SpectralResult spectral = spectral_cluster_full(affinity, k, seed);
  result.assignment = std::move(spectral.assignment);
  result.embedding = std::move(spectral.embedding);
  return result;
}

// --- silhouette ------------------------------------------------------------

namespace cluster_detail {

inline double silhouette_from_distances(const Eigen::MatrixXd& dist,
                                        const std::vector<int>& labels,
                                        int k) {
  const Eigen::Index n = dist.rows();
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int label : labels) ++sizes[static_cast<std::size_t>(label)];

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int own = labels[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] == 1) {
      continue;  // singleton scores 0
    }
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
          dist(i, j);
    }
    double a = sums[static_cast<std::size_t>(own)] /
               (sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] /
                          sizes[static_cast<std::size_t>(c)]);
    }
    double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace cluster_detail

// Mean silhouette of embedded points under Euclidean distance.
inline double silhouette_points(const Eigen::MatrixXd& points,
                                const std::vector<int>& labels, int k) {
  if (k < 2) fail(ErrorKind::Metric, "silhouette needs k >= 2");
  if (static_cast<Eigen::Index>(labels.size()) != points.rows())
    fail(ErrorKind::Metric, "silhouette label count mismatch");
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = (points.row(i) - points.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return cluster_detail::silhouette_from_distances(dist, labels, k);
}

// Mean silhouette against an affinity matrix, using 1 - affinity as the
// dissimilarity.
inline double silhouette_affinity(const AffinityMatrix& affinity,
                                  const std::vector<int>& labels, int k) {
  if (k < 2) fail(ErrorKind::Metric, "silhouette needs k >= 2");
  if (labels.size() != affinity.size())
    fail(ErrorKind::Metric, "silhouette label count mismatch");
  Eigen::MatrixXd dist =
      Eigen::MatrixXd::Ones(affinity.values.rows(), affinity.values.cols()) -
      affinity.values;
  return cluster_detail::silhouette_from_distances(dist, labels, k);
}

// --- k selection -------------------------------------------------------------

enum class SilhouetteSpace { Embedding, Affinity };

// Maximum mean silhouette wins; exact ties go to the smaller k (candidates
// are visited in ascending order and only strict improvements replace the
// incumbent).
inline int choose_k(const std::vector<int>& candidate_ks,
                    const std::map<int, double>& scores) {
  if (candidate_ks.empty())
    fail(ErrorKind::Parameter, "no candidate k values");
  int chosen = candidate_ks.front();
  for (int k : candidate_ks)
    if (scores.at(k) > scores.at(chosen)) chosen = k;
  return chosen;
}

struct KSelection {
  KSelectionTrace trace;
  std::map<int, SpectralResult> results;
};

// Clusters the affinity at every k in [k_lo, k_hi] (clipped to [2, q-1]),
// scores each with the mean silhouette, and picks the max; ties go to the
// smaller k. Per-k seeds are derived from the base seed.
inline KSelection select_k(const AffinityMatrix& affinity, int k_lo, int k_hi,
                           std::uint64_t seed,
                           SilhouetteSpace space = SilhouetteSpace::Embedding) {
  const int q = static_cast<int>(affinity.size());
  int lo = std::max(2, k_lo);
  int hi = std::min(q - 1, k_hi);
  if (lo > hi)
    fail(ErrorKind::Parameter,
         "k range [" + std::to_string(k_lo) + "," + std::to_string(k_hi) +
             "] is empty after clipping to [2," + std::to_string(q - 1) + "]");

  KSelection selection;
  for (int k = lo; k <= hi; ++k) {
    SpectralResult result = spectral_cluster_full(
        affinity, k, derive_seed(seed, static_cast<std::uint64_t>(k)));
    double score =
        space == SilhouetteSpace::Embedding
            ? silhouette_points(result.embedding, result.assignment.labels, k)
            : silhouette_affinity(affinity, result.assignment.labels, k);
    selection.trace.candidate_ks.push_back(k);
    selection.trace.mean_silhouettes[k] = score;
    selection.results.emplace(k, std::move(result));
  }
  selection.trace.chosen_k =
      choose_k(selection.trace.candidate_ks, selection.trace.mean_silhouettes);
  return selection;
}

struct FeatureKSelection {
  KSelectionTrace trace;
  StandardizedFeatures features;
  std::map<int, ClusterAssignment> assignments;
};

// Cold-start variant: clusters are built from survey scores and the
// silhouette is computed on the standardized feature vectors themselves.
inline FeatureKSelection select_k_features(
    const std::vector<const OnboardingProfile*>& profiles,
    const std::vector<std::string>& score_names, int k_lo, int k_hi,
    std::uint64_t seed) {
  FeatureKSelection selection;
  selection.features = standardize_scores(profiles, score_names);
  AffinityMatrix affinity = feature_affinity(selection.features);

  const int q = static_cast<int>(affinity.size());
  int lo = std::max(2, k_lo);
  int hi = std::min(q - 1, k_hi);
  if (lo > hi)
    fail(ErrorKind::Parameter,
         "k range [" + std::to_string(k_lo) + "," + std::to_string(k_hi) +
             "] is empty after clipping to [2," + std::to_string(q - 1) + "]");

  for (int k = lo; k <= hi; ++k) {
    SpectralResult result = spectral_cluster_full(
        affinity, k, derive_seed(seed, static_cast<std::uint64_t>(k)));
    double score = silhouette_points(selection.features.values,
                                     result.assignment.labels, k);
    selection.trace.candidate_ks.push_back(k);
    selection.trace.mean_silhouettes[k] = score;
    selection.assignments.emplace(k, std::move(result.assignment));
  }
  selection.trace.chosen_k =
      choose_k(selection.trace.candidate_ks, selection.trace.mean_silhouettes);
  return selection;
}

}  // namespace ccm
