#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "ccm/cluster.hpp"
#include "ccm/similarity.hpp"
#include "helpers.hpp"

using namespace ccm;

namespace {

AffinityMatrix block_affinity(const std::vector<int>& block_sizes,
                              double within = 1.0, double between = 0.0) {
  AffinityMatrix m;
  std::vector<int> block_of;
  for (std::size_t b = 0; b < block_sizes.size(); ++b)
    for (int i = 0; i < block_sizes[b]; ++i) {
      m.occupant_ids.push_back("o" + std::to_string(m.occupant_ids.size()));
      block_of.push_back(static_cast<int>(b));
    }
  const auto q = static_cast<Eigen::Index>(m.occupant_ids.size());
  m.values.resize(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j)
      m.values(i, j) = block_of[static_cast<std::size_t>(i)] ==
                               block_of[static_cast<std::size_t>(j)]
                           ? within
                           : between;
  m.values.diagonal().setOnes();
  return m;
}

// Same partition up to label renaming.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto f = fwd.emplace(a[i], b[i]);
    if (!f.second && f.first->second != b[i]) return false;
    auto g = bwd.emplace(b[i], a[i]);
    if (!g.second && g.first->second != a[i]) return false;
  }
  return true;
}

// Exhaustive best 2-partition by total within-cluster affinity.
std::vector<int> brute_force_two_partition(const Eigen::MatrixXd& affinity) {
  const int n = static_cast<int>(affinity.rows());
  std::vector<int> best;
  double best_score = -1.0;
  for (unsigned mask = 1; mask + 1 < (1u << (n - 1)); ++mask) {
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n - 1; ++i)
      labels[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
    double score = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (labels[static_cast<std::size_t>(i)] ==
            labels[static_cast<std::size_t>(j)])
          score += affinity(i, j);
    if (score > best_score) {
      best_score = score;
      best = labels;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("spectral clustering recovers two planted blocks") {
  AffinityMatrix m = block_affinity({5, 5});
  ClusterAssignment assignment = spectral_cluster(m, 2, 7);
  std::vector<int> expected = brute_force_two_partition(m.values);
  REQUIRE(same_partition(assignment.labels, expected));
}

TEST_CASE("spectral clustering rejects out-of-range k") {
  AffinityMatrix m = block_affinity({3, 3});
  REQUIRE_THROWS_AS(spectral_cluster(m, 1, 0), Error);
  REQUIRE_THROWS_AS(spectral_cluster(m, 6, 0), Error);  // k = q
  REQUIRE_THROWS_AS(spectral_cluster(m, 7, 0), Error);
}

TEST_CASE("permuting occupants permutes the partition consistently") {
  AffinityMatrix m = block_affinity({4, 6}, 0.9, 0.15);
  std::mt19937_64 rng(5);
  std::vector<Eigen::Index> perm(m.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  AffinityMatrix shuffled;
  shuffled.kind = m.kind;
  shuffled.values.resize(m.values.rows(), m.values.cols());
  for (std::size_t i = 0; i < m.size(); ++i)
    shuffled.occupant_ids.push_back(m.occupant_ids[static_cast<std::size_t>(perm[i])]);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      shuffled.values(i, j) =
          m.values(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);

  auto original = spectral_cluster(m, 2, 11);
  auto permuted = spectral_cluster(shuffled, 2, 11);
  // map the permuted labels back into the original order and compare
  std::vector<int> unpermuted(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    unpermuted[static_cast<std::size_t>(perm[i])] = permuted.labels[i];
  REQUIRE(same_partition(original.labels, unpermuted));
}

TEST_CASE("random disjoint-block affinities are recovered exactly") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> n_blocks_d(2, 4);
    int n_blocks = n_blocks_d(rng);
    std::vector<int> sizes;
    std::vector<int> truth;
    for (int b = 0; b < n_blocks; ++b) {
      std::uniform_int_distribution<int> size_d(2, 5);
      sizes.push_back(size_d(rng));
      for (int i = 0; i < sizes.back(); ++i) truth.push_back(b);
    }
    AffinityMatrix m = block_affinity(sizes);
    ClusterAssignment assignment =
        spectral_cluster(m, n_blocks, static_cast<std::uint64_t>(trial));
    REQUIRE(same_partition(assignment.labels, truth));
  }
}

TEST_CASE("silhouette reproduces its closed-form examples") {
  Eigen::MatrixXd points(4, 1);
  points << 0.0, 0.1, 10.0, 10.1;
  std::vector<int> labels = {0, 0, 1, 1};
  double expected = 0.0;
  {
    double s = 0.0;
    s += (10.05 - 0.1) / 10.05;  // point 0: b = (10 + 10.1)/2
    s += (9.95 - 0.1) / 9.95;    // point 1: b = (9.9 + 10)/2
    s += (9.95 - 0.1) / 9.95;    // point 2 symmetric
    s += (10.05 - 0.1) / 10.05;  // point 3
    expected = s / 4.0;
  }
  REQUIRE(silhouette_points(points, labels, 2) ==
          Catch::Approx(expected).margin(1e-12));
  REQUIRE(silhouette_points(points, labels, 2) == Catch::Approx(0.99).margin(0.001));

  Eigen::MatrixXd identical = Eigen::MatrixXd::Zero(4, 2);
  REQUIRE(silhouette_points(identical, {0, 0, 1, 1}, 2) == 0.0);

  REQUIRE_THROWS_AS(silhouette_points(points, {0, 0, 0, 0}, 1), Error);
}

TEST_CASE("silhouette stays within [-1, 1] on random data") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> n_d(4, 20);
    int n = n_d(rng);
    Eigen::MatrixXd points(n, 3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j)
        points(i, j) = std::uniform_real_distribution<double>(-5, 5)(rng);
    std::uniform_int_distribution<int> k_d(2, 3);
    int k = k_d(rng);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) labels.push_back(i % k);
    double s = silhouette_points(points, labels, k);
    REQUIRE(s >= -1.0);
    REQUIRE(s <= 1.0);
  }
}

TEST_CASE("planted labels beat random label permutations") {
  std::mt19937_64 rng(19);
  Eigen::MatrixXd points(12, 2);
  std::vector<int> labels;
  for (int i = 0; i < 12; ++i) {
    int cluster = i / 6;
    points(i, 0) = cluster * 8.0 + std::normal_distribution<double>(0, 0.4)(rng);
    points(i, 1) = std::normal_distribution<double>(0, 0.4)(rng);
    labels.push_back(cluster);
  }
  double planted = silhouette_points(points, labels, 2);
  for (int perm = 0; perm < 100; ++perm) {
    std::vector<int> shuffled = labels;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    REQUIRE(planted >= silhouette_points(points, shuffled, 2));
  }
}

TEST_CASE("silhouette accepts an affinity matrix as 1 - distance") {
  AffinityMatrix m = block_affinity({3, 3}, 0.95, 0.1);
  std::vector<int> labels = {0, 0, 0, 1, 1, 1};
  double s = silhouette_affinity(m, labels, 2);
  REQUIRE(s > 0.5);  // strong blocks separate cleanly
  std::vector<int> bad = {0, 1, 0, 1, 0, 1};
  REQUIRE(silhouette_affinity(m, bad, 2) < s);
}

TEST_CASE("select_k picks the planted block count") {
  AffinityMatrix m = block_affinity({5, 5}, 0.95, 0.05);
  KSelection selection = select_k(m, 2, 5, 3);
  REQUIRE(selection.trace.chosen_k == 2);
  REQUIRE(selection.trace.candidate_ks == std::vector<int>{2, 3, 4, 5});

  // determinism under a fixed seed
  KSelection again = select_k(m, 2, 5, 3);
  REQUIRE(again.trace.chosen_k == selection.trace.chosen_k);
  REQUIRE(again.trace.mean_silhouettes == selection.trace.mean_silhouettes);

  REQUIRE_THROWS_AS(select_k(m, 11, 12, 3), Error);  // empty after clipping
}

TEST_CASE("chosen k ties break toward the smaller k") {
  REQUIRE(choose_k({2, 3, 4}, {{2, 0.5}, {3, 0.5}, {4, 0.4}}) == 2);
  REQUIRE(choose_k({2, 3, 4}, {{2, 0.3}, {3, 0.5}, {4, 0.5}}) == 3);
  REQUIRE(choose_k({2, 3}, {{2, -0.1}, {3, -0.1}}) == 2);
}

TEST_CASE("select_k also works in affinity space") {
  AffinityMatrix m = block_affinity({5, 5}, 0.95, 0.05);
  KSelection selection = select_k(m, 2, 5, 3, SilhouetteSpace::Affinity);
  REQUIRE(selection.trace.chosen_k == 2);
}

TEST_CASE("Laplacian eigenpairs reconstruct the Laplacian") {
  std::mt19937_64 rng(29);
  for (int q : {5, 20, 50}) {
    Eigen::MatrixXd values(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j) {
        double v = std::uniform_real_distribution<double>(0, 1)(rng);
        values(i, j) = v;
        values(j, i) = v;
      }
    values.diagonal().setOnes();

    Eigen::VectorXd degree = values.rowwise().sum();
    Eigen::VectorXd inv_sqrt =
        degree.array().sqrt().inverse().matrix();
    Eigen::MatrixXd laplacian =
        Eigen::MatrixXd::Identity(q, q) -
        inv_sqrt.asDiagonal() * values * inv_sqrt.asDiagonal();
    laplacian = 0.5 * (laplacian + laplacian.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    REQUIRE(solver.info() == Eigen::Success);
    Eigen::MatrixXd reconstructed = solver.eigenvectors() *
                                    solver.eigenvalues().asDiagonal() *
                                    solver.eigenvectors().transpose();
    REQUIRE((reconstructed - laplacian).norm() < 1e-6);
  }
}

TEST_CASE("feature clustering separates planted score blobs") {
  std::vector<OnboardingProfile> profiles;
  std::mt19937_64 rng(31);
  for (int i = 0; i < 12; ++i) {
    OnboardingProfile p;
    p.occupant_id = "o" + std::to_string(i);
    p.height_cm = 170;
    p.weight_kg = 65;
    double center = i < 6 ? 2.0 : 6.0;
    p.hsps_score = center + std::normal_distribution<double>(0, 0.2)(rng);
    p.swls_score = center * 4 + std::normal_distribution<double>(0, 0.5)(rng);
    profiles.push_back(p);
  }
  std::vector<const OnboardingProfile*> ptrs;
  for (const auto& p : profiles) ptrs.push_back(&p);

  FeatureClusterResult result =
      feature_spectral_cluster(ptrs, {"hsps", "swls"}, 2, 5);
  std::vector<int> truth;
  for (int i = 0; i < 12; ++i) truth.push_back(i < 6 ? 0 : 1);
  REQUIRE(same_partition(result.assignment.labels, truth));

  // zero-variance features are dropped with a warning
  for (auto& p : profiles) p.swls_score = 10.0;
  std::vector<const OnboardingProfile*> ptrs2;
  for (const auto& p : profiles) ptrs2.push_back(&p);
  FeatureClusterResult dropped =
      feature_spectral_cluster(ptrs2, {"hsps", "swls"}, 2, 5);
  REQUIRE(dropped.features.feature_names == std::vector<std::string>{"hsps"});
}

TEST_CASE("identical profiles cannot be clustered") {
  std::vector<OnboardingProfile> profiles;
  for (int i = 0; i < 8; ++i) {
    OnboardingProfile p;
    p.occupant_id = "o" + std::to_string(i);
    p.height_cm = 170;
    p.weight_kg = 65;
    p.hsps_score = 4.0;
    p.swls_score = 20.0;
    profiles.push_back(p);
  }
  std::vector<const OnboardingProfile*> ptrs;
  for (const auto& p : profiles) ptrs.push_back(&p);
  REQUIRE_THROWS_AS(feature_spectral_cluster(ptrs, {"hsps", "swls"}, 2, 5),
                    Error);
}

TEST_CASE("all three surveys embed profiles in seven dimensions") {
  std::vector<OnboardingProfile> profiles;
  std::mt19937_64 rng(37);
  for (int i = 0; i < 10; ++i) {
    OnboardingProfile p;
    p.occupant_id = "o" + std::to_string(i);
    p.height_cm = 170;
    p.weight_kg = 65;
    std::normal_distribution<double> n(4.0, 1.0);
    p.hsps_score = n(rng);
    p.swls_score = n(rng);
    std::map<std::string, double> traits;
    for (const auto& t : b5p_trait_names()) traits[t] = n(rng);
    p.b5p_traits = traits;
    profiles.push_back(p);
  }
  std::vector<const OnboardingProfile*> ptrs;
  for (const auto& p : profiles) ptrs.push_back(&p);

  std::vector<std::string> all_scores = {"hsps", "swls"};
  for (const auto& t : b5p_trait_names()) all_scores.push_back(t);
  StandardizedFeatures features = standardize_scores(ptrs, all_scores);
  REQUIRE(features.feature_names.size() == 7);
  REQUIRE(features.values.cols() == 7);
}
