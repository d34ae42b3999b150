#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace test_helpers {

// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    path_ = base / ("ccm_test_" + std::to_string(rd()) + "_" +
                    std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string data_file(const std::string& name) {
  return std::string(CCM_TEST_DATA_DIR) + "/" + name;
}

// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, long> contingency;
  std::map<int, long> row_sums, col_sums;
  for (std::size_t i = 0; i < n; ++i) {
    ++contingency[{a[i], b[i]}];
    ++row_sums[a[i]];
    ++col_sums[b[i]];
  }
  auto choose2 = [](long x) { return 0.5 * x * (x - 1); };
  double sum_ij = 0, sum_a = 0, sum_b = 0;
  for (const auto& [key, count] : contingency) sum_ij += choose2(count);
  for (const auto& [key, count] : row_sums) sum_a += choose2(count);
  for (const auto& [key, count] : col_sums) sum_b += choose2(count);
  double expected = sum_a * sum_b / choose2(static_cast<long>(n));
  double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both labelings trivial
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace test_helpers
