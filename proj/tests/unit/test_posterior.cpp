#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "tbme/error.hpp"
#include "tbme/likelihood.hpp"
#include "tbme/posterior.hpp"

using namespace tbme;

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Table whose window (end=1, tau=1) log-likelihoods are exactly `ll` up to a
// common constant: predictions are offsets chosen so -r^2/2 = ll - max.
LogLikTable table_from_loglik(const std::vector<double>& ll) {
  const double top = *std::max_element(ll.begin(), ll.end());
  Matrix pred(ll.size(), 1);
  for (std::size_t i = 0; i < ll.size(); ++i) pred(i, 0) = std::sqrt(2.0 * (top - ll[i]));
  return gauss_log_terms(pred, std::vector<double>{0.0}, std::vector<double>{1.0});
}

}  // namespace

TEST_CASE("equal likelihoods give uniform weights") {
  const LogLikTable t = table_from_loglik(std::vector<double>(8, -2.0));
  const PosteriorSnapshot s = posterior_weights(t, 1, 1);
  for (double w : s.weights) CHECK(w == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(s.ess == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("a dominating member takes all the weight") {
  const LogLikTable t = table_from_loglik({-60.0, -55.0, -3.0, -70.0});
  const PosteriorSnapshot s = posterior_weights(t, 1, 1);
  CHECK(s.map_index == 2);
  CHECK(s.weights[2] >= 1.0 - 1e-20);
}

TEST_CASE("weights match extended-precision normalization") {
  std::mt19937_64 rng(10);
  const Matrix pred = test::random_matrix(10, 6, rng, -1.0, 1.0);
  const std::vector<double> data(6, 0.1), sigma(6, 0.3);
  const LogLikTable t = gauss_log_terms(pred, data, sigma);
  const PosteriorSnapshot s = posterior_weights(t, 6, 4);
  const auto ll = window_loglik(t, 6, 4);
  long double total = 0.0L;
  for (double x : ll) total += std::exp(static_cast<long double>(x));
  double sum = 0.0;
  for (std::size_t i = 0; i < ll.size(); ++i) {
    const double direct = static_cast<double>(std::exp(static_cast<long double>(ll[i])) / total);
    CHECK(s.weights[i] == doctest::Approx(direct).epsilon(1e-13));
    sum += s.weights[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("weighted_quantile small cases") {
  const std::vector<double> v{3.0, 1.0, 2.0};
  const std::vector<double> w(3, 1.0 / 3.0);
  CHECK(weighted_quantile(v, w, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(weighted_quantile(v, w, 0.0) == 1.0);
  CHECK(weighted_quantile(v, w, 1.0) == 3.0);
  for (double q : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    CHECK(weighted_quantile(v, std::vector<double>{0.0, 1.0, 0.0}, q) == 1.0);
  }
  CHECK_THROWS_AS(weighted_quantile(v, w, 1.5), ValidationError);
  CHECK_THROWS_AS(weighted_quantile(v, w, -0.1), ValidationError);
  CHECK_THROWS_AS(weighted_quantile(v, std::vector<double>{0.5, 0.5}, 0.5), ValidationError);
}

TEST_CASE("weighted_quantile agrees with a resampling oracle") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 100;
  std::vector<double> v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = nd(rng);
    w[i] = u(rng) * u(rng);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;

  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<double> resampled(1'000'000);
  for (double& x : resampled) x = v[pick(rng)];
  std::sort(resampled.begin(), resampled.end());
  std::vector<double> grid = v;
  std::sort(grid.begin(), grid.end());
  auto rank = [&](double x) {
    return static_cast<long>(std::lower_bound(grid.begin(), grid.end(), x) - grid.begin());
  };
  for (double q : {0.025, 0.16, 0.5, 0.84, 0.975}) {
    const double oracle = resampled[static_cast<std::size_t>(q * (resampled.size() - 1))];
    const double got = weighted_quantile(v, w, q);
    CHECK(std::abs(rank(got) - rank(oracle)) <= 2);
  }
}

TEST_CASE("weighted KDE") {
  const std::vector<double> v{0.0, 4.0}, w{0.5, 0.5};
  const auto d = weighted_kde(v, w, std::vector<double>{2.0}, 1.0);
  CHECK(d[0] == doctest::Approx(2.0 * 0.5 * phi(2.0)).epsilon(1e-14));
  CHECK(d[0] == doctest::Approx(0.05400).epsilon(1e-3));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(1.0, 2.0);
  std::vector<double> x(50);
  for (double& xi : x) xi = nd(rng);
  const std::vector<double> uniform(50, 1.0 / 50.0);
  const double h = 0.7;
  std::vector<double> grid;
  for (int g = 0; g <= 40; ++g) grid.push_back(-6.0 + 0.35 * g);
  const auto kde = weighted_kde(x, uniform, grid, h);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double plain = 0.0;
    for (double xi : x) plain += phi((grid[g] - xi) / h);
    plain /= 50.0 * h;
    CHECK(std::abs(kde[g] - plain) < 1e-12);
  }

  // Silverman bandwidth with uniform weights: 1.06 * sd * N^(-1/5).
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / 50.0;
  double var = 0.0;
  for (double xi : x) var += (xi - mean) * (xi - mean);
  var /= 50.0;
  CHECK(silverman_bandwidth(x, uniform) ==
        doctest::Approx(1.06 * std::sqrt(var) * std::pow(50.0, -0.2)).epsilon(1e-12));

  // Normalization on a wide grid with the default bandwidth.
  std::vector<double> wide;
  for (int g = 0; g <= 4000; ++g) wide.push_back(-20.0 + 0.01 * g);
  const auto dens = weighted_kde(x, uniform, wide);
  double integral = 0.0;
  for (std::size_t g = 1; g < wide.size(); ++g) integral += 0.005 * (dens[g] + dens[g - 1]);
  CHECK(integral == doctest::Approx(1.0).epsilon(0.01));

  CHECK_THROWS_AS(weighted_kde(std::vector<double>(4, 2.5), std::vector<double>(4, 0.25),
                               std::vector<double>{2.5}),
                  NumericalError);
}

TEST_CASE("posterior snapshot marginals") {
  PredictionEnsemble e = test::random_ensemble(200, 20, 17);
  e.parameter_names.push_back("fixed");
  e.parameter_bounds.push_back({3.0, 3.0});
  Matrix params(200, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    params(i, 0) = e.parameters(i, 0);
    params(i, 1) = e.parameters(i, 1);
    params(i, 2) = 3.0;
  }
  e.parameters = params;
  std::vector<double> data(e.predictions.row(5).begin(), e.predictions.row(5).end());
  const LogLikTable t = gauss_log_terms(e.predictions, data, std::vector<double>(20, 0.05));
  const PosteriorSnapshot s = posterior_snapshot(t, e, 20, 10, 64);
  REQUIRE(s.marginals.size() == 3);
  const Marginal& a = s.marginals[0];
  CHECK(a.name == "a");
  CHECK(a.q025 <= a.q500);
  CHECK(a.q500 <= a.q975);
  CHECK(a.grid.size() == 64);
  CHECK(a.grid.front() == 0.0);
  CHECK(a.grid.back() == 1.0);
  CHECK(a.bandwidth > 0.0);
  CHECK_FALSE(a.point_mass);
  CHECK(a.map_value == e.parameters(s.map_index, 0));
  const Marginal& f = s.marginals[2];
  CHECK(f.point_mass);
  CHECK(f.grid.empty());
  CHECK(f.q500 == 3.0);
}
