#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "tbme/error.hpp"
#include "tbme/evidence.hpp"
#include "tbme/likelihood.hpp"

using namespace tbme;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("log_sum_exp") {
  CHECK(log_sum_exp(std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_sum_exp(std::vector<double>{-1000.0, -1000.0}) ==
        doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(log_sum_exp(std::vector<double>{800.0, 800.0}) ==
        doctest::Approx(800.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(log_sum_exp(std::vector<double>{-kInf, 1.5}) == 1.5);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 0.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(10);
    long double direct = 0.0L;
    for (double& x : v) {
      x = u(rng);
      direct += std::exp(static_cast<long double>(x));
    }
    CHECK(std::abs(log_sum_exp(v) - static_cast<double>(std::log(direct))) < 1e-12);
  }

  CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), NumericalError);
  CHECK_THROWS_AS(log_sum_exp(std::vector<double>{-kInf, -kInf}), NumericalError);
  CHECK_THROWS_AS(log_sum_exp(std::vector<double>{std::nan(""), 0.0}), NumericalError);
}

TEST_CASE("ESS identities") {
  CHECK(ess_of(std::vector<double>(17, -3.25)) == 17.0);
  CHECK(ess_of(std::vector<double>{-kInf, 2.0, -kInf, -kInf}) == 1.0);
  CHECK(ess_of(std::vector<double>{std::log(0.75), std::log(0.25)}) ==
        doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("window_evidence leave-one-out") {
  const std::vector<double> ll{std::log(1.0), std::log(2.0), std::log(6.0)};
  CHECK(window_evidence(ll).log_mean == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  const auto loo = window_evidence(ll, 2);
  CHECK(loo.log_mean == doctest::Approx(std::log(1.5)).epsilon(1e-14));
  CHECK(loo.ess == doctest::Approx(9.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("window count law") {
  for (std::size_t n_o : {10u, 200u}) {
    for (std::size_t tau : {std::size_t{1}, std::size_t{5}, std::size_t{20}, n_o}) {
      if (tau > n_o) continue;
      CHECK(window_count(n_o, tau) == n_o - tau + 1);
    }
  }
  CHECK(window_count(10, 11) == 0);
  CHECK(window_count(10, 0) == 0);
}

TEST_CASE("tbme_curve shape and small-ensemble oracle") {
  std::mt19937_64 rng(77);
  const std::size_t n_mc = 30, n_o = 200;
  const Matrix pred = test::random_matrix(n_mc, n_o, rng, 0.0, 0.2);
  const std::vector<double> data(n_o, 0.1), sigma(n_o, 0.5);
  const LogLikTable table = gauss_log_terms(pred, data, sigma);

  const TbmeCurve c5 = tbme_curve(table, 5);
  REQUIRE(c5.n_windows() == 196);
  CHECK(c5.window_ends.front() == 5);
  CHECK(c5.window_ends.back() == 200);
  CHECK(c5.n_mc_used == n_mc);

  for (std::size_t k = 0; k < c5.n_windows(); k += 13) {
    const auto ll = window_loglik(table, c5.window_ends[k], 5);
    long double mean = 0.0L;
    for (double x : ll) mean += std::exp(static_cast<long double>(x));
    mean /= n_mc;
    const double rel = std::abs(std::exp(c5.log_tbme[k]) / static_cast<double>(mean) - 1.0);
    CHECK(rel < 1e-10);
  }

  const TbmeCurve full = tbme_curve(table, n_o);
  REQUIRE(full.n_windows() == 1);
  const auto ll = window_loglik(table, n_o, n_o);
  CHECK(full.log_tbme[0] ==
        doctest::Approx(log_sum_exp(ll) - std::log(double(n_mc))).epsilon(1e-14));

  CHECK_THROWS_AS(tbme_curve(table, 0), ValidationError);
  CHECK_THROWS_AS(tbme_curve(table, n_o + 1), ValidationError);
}

TEST_CASE("single-member curve equals its window log-likelihood") {
  std::mt19937_64 rng(1);
  const Matrix pred = test::random_matrix(1, 15, rng);
  const std::vector<double> data(15, 0.0), sigma(15, 0.7);
  const LogLikTable table = gauss_log_terms(pred, data, sigma);
  const TbmeCurve c = tbme_curve(table, 4);
  for (std::size_t k = 0; k < c.n_windows(); ++k) {
    CHECK(c.log_tbme[k] == window_loglik(table, c.window_ends[k], 4)[0]);
    CHECK(c.ess[k] == 1.0);
  }
}

TEST_CASE("curve is independent of worker count") {
  std::mt19937_64 rng(2);
  const Matrix pred = test::random_matrix(64, 80, rng);
  const std::vector<double> data(80, 0.0), sigma(80, 0.4);
  const LogLikTable table = gauss_log_terms(pred, data, sigma);
  const TbmeCurve a = tbme_curve(table, 10, 1);
  const TbmeCurve b = tbme_curve(table, 10, 3);
  CHECK(a.log_tbme == b.log_tbme);
  CHECK(a.ess == b.ess);
}
