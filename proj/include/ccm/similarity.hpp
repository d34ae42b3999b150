#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/cv.hpp"
#include "ccm/data.hpp"
#include "ccm/forest.hpp"
#include "ccm/metrics.hpp"

namespace ccm {

enum class AffinityKind { Distribution, CrossModel, Blended };

inline std::string affinity_kind_name(AffinityKind k) {
  switch (k) {
    case AffinityKind::Distribution: return "distribution";
    case AffinityKind::CrossModel: return "cross_model";
    case AffinityKind::Blended: return "blended";
  }
  return "unknown";
}

// Square symmetric occupant-similarity matrix in [0,1] with unit diagonal.
struct AffinityMatrix {
  std::vector<std::string> occupant_ids;
  Eigen::MatrixXd values;
  AffinityKind kind = AffinityKind::Distribution;

  std::size_t size() const { return occupant_ids.size(); }

  void validate() const {
    const auto q = static_cast<Eigen::Index>(occupant_ids.size());
    if (values.rows() != q || values.cols() != q)
      fail(ErrorKind::Schema, "affinity matrix shape does not match ids");
    for (Eigen::Index i = 0; i < q; ++i) {
      if (std::abs(values(i, i) - 1.0) > 1e-9)
        fail(ErrorKind::Numerical, "affinity diagonal entry != 1");
      for (Eigen::Index j = 0; j < q; ++j) {
        if (std::abs(values(i, j) - values(j, i)) > 1e-9)
          fail(ErrorKind::Numerical, "affinity matrix not symmetric");
        if (values(i, j) < -1e-12 || values(i, j) > 1.0 + 1e-12)
          fail(ErrorKind::Numerical, "affinity entry outside [0,1]");
      }
    }
  }
};

struct BlendWeights {
  double alpha = 0.5;  // cross-model weight
  double beta = 0.5;   // distribution weight

  BlendWeights() = default;
  BlendWeights(double a, double b) : alpha(a), beta(b) {
    if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0 ||
        std::abs(alpha + beta - 1.0) > 1e-12)
      fail(ErrorKind::Parameter,
           "blend weights must lie in [0,1] and sum to 1 (got alpha=" +
               std::to_string(a) + ", beta=" + std::to_string(b) + ")");
  }
};

// Jensen-Shannon divergence with base-2 logarithms, so the value is exactly
// bounded in [0,1] and disjoint supports attain 1.
inline double js_divergence(const std::array<double, kNumClasses>& p,
                            const std::array<double, kNumClasses>& q) {
  double sp = 0.0, sq = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (p[c] < 0.0 || q[c] < 0.0)
      fail(ErrorKind::Parameter, "probability vectors must be non-negative");
    sp += p[c];
    sq += q[c];
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
    fail(ErrorKind::Parameter, "probability vectors must sum to 1");

  auto term = [](double x, double m) {
    return x > 0.0 ? x * std::log2(x / m) : 0.0;  // 0 log 0 := 0
  };
  double d = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    double m = 0.5 * (p[c] + q[c]);
    if (m <= 0.0) continue;
    d += 0.5 * term(p[c], m) + 0.5 * term(q[c], m);
  }
  // clamp tiny negative rounding and the 1+eps overshoot
  return std::min(1.0, std::max(0.0, d));
}

// Maps a divergence matrix through exp(-(z-c)^2 / (2 mu^2)) with mu the
// standard deviation of the off-diagonal entries. All off-diagonal entries
// equal means mu = 0; that degenerates to an all-ones matrix (warning, not
// an error). Diagonal is forced to 1.
inline Eigen::MatrixXd rbf_normalize(const Eigen::MatrixXd& divergences,
                                     double center_c, double* mu_out = nullptr) {
  const Eigen::Index q = divergences.rows();
  if (divergences.cols() != q)
    fail(ErrorKind::Parameter, "divergence matrix must be square");
  for (Eigen::Index i = 0; i < q; ++i) {
    if (std::abs(divergences(i, i)) > 1e-12)
      fail(ErrorKind::Parameter, "divergence diagonal must be zero");
    for (Eigen::Index j = i + 1; j < q; ++j)
      if (std::abs(divergences(i, j) - divergences(j, i)) > 1e-9)
        fail(ErrorKind::Parameter, "divergence matrix must be symmetric");
  }

  double sum = 0.0;
  double count = 0.0;
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j) {
      if (i == j) continue;
      sum += divergences(i, j);
      count += 1.0;
    }
  Eigen::MatrixXd out(q, q);
  double mu = 0.0;
  if (count > 0.0) {
    double mean = sum / count;
    double var = 0.0;  // two-pass, stable when all entries coincide
    for (Eigen::Index i = 0; i < q; ++i)
      for (Eigen::Index j = 0; j < q; ++j) {
        if (i == j) continue;
        double d = divergences(i, j) - mean;
        var += d * d;
      }
    mu = std::sqrt(var / count);
    if (mu < 1e-12 * (1.0 + std::abs(mean))) mu = 0.0;
  }
  if (mu_out) *mu_out = mu;
  if (mu == 0.0) {
    log_warn("rbf_normalize: all off-diagonal divergences equal; returning "
             "an all-ones affinity matrix");
    out.setOnes();
    return out;
  }
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j) {
      double z = divergences(i, j) - center_c;
      out(i, j) = std::exp(-(z * z) / (2.0 * mu * mu));
    }
  out.diagonal().setOnes();
  return out;
}

// Pairwise JS divergence of response distributions, RBF-normalized with
// c = 0 so that identical occupants map to affinity 1.
inline AffinityMatrix distribution_matrix(
    const std::vector<const OccupantRecord*>& records, double* mu_out = nullptr) {
  if (records.size() < 2)
    fail(ErrorKind::Parameter,
         "distribution matrix needs at least two occupants");
  const auto q = static_cast<Eigen::Index>(records.size());
  std::vector<std::array<double, kNumClasses>> dists;
  dists.reserve(records.size());
  for (const auto* r : records) dists.push_back(response_distribution(*r));

  Eigen::MatrixXd divergences = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = i + 1; j < q; ++j) {
      double d = js_divergence(dists[static_cast<std::size_t>(i)],
                               dists[static_cast<std::size_t>(j)]);
      divergences(i, j) = d;
      divergences(j, i) = d;
    }

  AffinityMatrix m;
  m.kind = AffinityKind::Distribution;
  for (const auto* r : records) m.occupant_ids.push_back(r->profile.occupant_id);
  m.values = rbf_normalize(divergences, 0.0, mu_out);
  m.validate();
  return m;
}

// Cross-model performance: s(i,j) = F1-micro of occupant i's PCM on
// occupant j's rows. Scores are already in [0,1] and stay unkernelized;
// the matrix is symmetrized by the arithmetic mean and the diagonal is 1
// by convention.
inline AffinityMatrix cross_model_matrix(
    const std::vector<const OccupantRecord*>& records,
    const std::map<std::string, const FittedForest*>& pcms) {
  if (records.size() < 2)
    fail(ErrorKind::Parameter,
         "cross-model matrix needs at least two occupants");
  const auto q = static_cast<Eigen::Index>(records.size());
  std::vector<TrainingMatrix> rows;
  rows.reserve(records.size());
  for (const auto* r : records)
    rows.push_back(build_matrix(*r, /*include_onboarding=*/false));

  Eigen::MatrixXd raw(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    auto it = pcms.find(records[static_cast<std::size_t>(i)]->profile.occupant_id);
    if (it == pcms.end() || it->second == nullptr)
      fail(ErrorKind::Config,
           "no PCM provided for occupant " +
               records[static_cast<std::size_t>(i)]->profile.occupant_id);
    for (Eigen::Index j = 0; j < q; ++j) {
      const auto& target = rows[static_cast<std::size_t>(j)];
      raw(i, j) = f1_micro(target.labels, it->second->predict(target));
    }
  }

  AffinityMatrix m;
  m.kind = AffinityKind::CrossModel;
  for (const auto* r : records) m.occupant_ids.push_back(r->profile.occupant_id);
  m.values = 0.5 * (raw + raw.transpose());
  m.values.diagonal().setOnes();
  m.validate();
  return m;
}

// Entrywise alpha*cross + beta*dist.
inline AffinityMatrix blend(const AffinityMatrix& cross,
                            const AffinityMatrix& dist, BlendWeights w) {
  if (cross.kind != AffinityKind::CrossModel ||
      dist.kind != AffinityKind::Distribution)
    fail(ErrorKind::Parameter,
         "blend expects a cross-model and a distribution matrix");
  if (cross.occupant_ids != dist.occupant_ids)
    fail(ErrorKind::AlignmentOrder,
         "blend inputs have different occupant orderings");
  AffinityMatrix m;
  m.kind = AffinityKind::Blended;
  m.occupant_ids = cross.occupant_ids;
  m.values = w.alpha * cross.values + w.beta * dist.values;
  m.validate();
  return m;
}

}  // namespace ccm
