#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "tbme/matrix.hpp"
#include "tbme/records.hpp"

namespace tbme::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols,
                            std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

// Ensemble with two named parameters; predictions are noisy linear trends so
// members are distinguishable.
inline PredictionEnsemble random_ensemble(std::size_t n_mc, std::size_t n_o,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PredictionEnsemble e;
  e.parameter_names = {"a", "b"};
  e.parameter_bounds = {{0.0, 1.0}, {0.0, 1.0}};
  e.parameters = Matrix(n_mc, 2);
  e.predictions = Matrix(n_mc, n_o);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double a = u(rng), b = u(rng);
    e.parameters(i, 0) = a;
    e.parameters(i, 1) = b;
    for (std::size_t t = 0; t < n_o; ++t) {
      e.predictions(i, t) = a + b * static_cast<double>(t) / n_o + 0.01 * u(rng);
    }
  }
  return e;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tbme_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace tbme::test
