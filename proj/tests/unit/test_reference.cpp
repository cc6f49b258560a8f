#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "tbme/error.hpp"
#include "tbme/evidence.hpp"
#include "tbme/likelihood.hpp"
#include "tbme/reference.hpp"

using namespace tbme;

namespace {

// Leave-one-out log-tBME of member `r` used as data, by direct summation.
double direct_loo(const PredictionEnsemble& e, const std::vector<double>& sigma,
                  std::size_t r, std::size_t window_end, std::size_t tau) {
  std::vector<double> ll;
  for (std::size_t i = 0; i < e.n_mc(); ++i) {
    if (i == r) continue;
    double s = 0.0;
    for (std::size_t t = window_end - tau; t < window_end; ++t) {
      s += gauss_log_term(e.predictions(r, t), e.predictions(i, t), sigma[t]);
    }
    ll.push_back(s);
  }
  return log_sum_exp(ll) - std::log(double(ll.size()));
}

}  // namespace

TEST_CASE("quantile labels round-trip") {
  for (std::size_t q = 0; q < kQuantileCount; ++q) {
    const auto level = static_cast<QuantileLevel>(q);
    CHECK(parse_quantile_level(quantile_label(level)) == level);
  }
  CHECK_THROWS_AS(parse_quantile_level("q050"), ValidationError);
}

TEST_CASE("empirical_quantile interpolates order statistics") {
  const std::vector<double> v{1.0, 2.0, 4.0, 8.0};
  CHECK(empirical_quantile(v, 0.0) == 1.0);
  CHECK(empirical_quantile(v, 1.0) == 8.0);
  CHECK(empirical_quantile(v, 0.5) == 3.0);
  CHECK(empirical_quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), ValidationError);
}

TEST_CASE("replicate schedule: permutation first, then uniform draws") {
  const auto s = replicate_schedule(50, 120, 4);
  REQUIRE(s.size() == 120);
  const std::set<std::size_t> first(s.begin(), s.begin() + 50);
  CHECK(first.size() == 50);
  CHECK(*first.rbegin() == 49);
  for (auto m : s) CHECK(m < 50);
  CHECK(replicate_schedule(50, 120, 4) == s);
  CHECK(replicate_schedule(50, 120, 5) != s);
  // A longer schedule extends a shorter one.
  const auto longer = replicate_schedule(50, 200, 4);
  CHECK(std::equal(s.begin(), s.end(), longer.begin()));
}

TEST_CASE("exhaustive leave-one-out with three members") {
  const PredictionEnsemble e = test::random_ensemble(3, 6, 21);
  const std::vector<double> sigma(6, 0.05);
  ReferenceOptions opt;
  opt.n_replicates = 3;
  const ReferenceBands b = sample_reference(e, sigma, 6, opt);
  REQUIRE(b.n_windows() == 1);
  std::vector<double> loo;
  for (std::size_t r = 0; r < 3; ++r) loo.push_back(direct_loo(e, sigma, r, 6, 6));
  std::sort(loo.begin(), loo.end());
  CHECK(b.at(0, QuantileLevel::min) == doctest::Approx(loo.front()).epsilon(1e-12));
  CHECK(b.at(0, QuantileLevel::max) == doctest::Approx(loo.back()).epsilon(1e-12));
  CHECK(b.at(0, QuantileLevel::q500) == doctest::Approx(loo[1]).epsilon(1e-12));
}

TEST_CASE("median band equals brute-force median over all members") {
  const PredictionEnsemble e = test::random_ensemble(20, 25, 8);
  const std::vector<double> sigma(25, 0.1);
  ReferenceOptions opt;
  opt.n_replicates = 20;
  opt.seed = 99;
  const ReferenceBands b = sample_reference(e, sigma, 5, opt);
  REQUIRE(b.n_windows() == 21);
  for (std::size_t k = 0; k < b.n_windows(); ++k) {
    std::vector<double> loo;
    for (std::size_t r = 0; r < 20; ++r) {
      loo.push_back(direct_loo(e, sigma, r, b.window_ends[k], 5));
    }
    std::sort(loo.begin(), loo.end());
    const double median = 0.5 * (loo[9] + loo[10]);
    CHECK(b.at(k, QuantileLevel::q500) == doctest::Approx(median).epsilon(1e-10));
    for (std::size_t q = 1; q < kQuantileCount; ++q) {
      CHECK(b.quantiles[k][q - 1] <= b.quantiles[k][q]);
    }
  }
}

TEST_CASE("reference is deterministic across worker counts") {
  const PredictionEnsemble e = test::random_ensemble(40, 30, 3);
  const std::vector<double> sigma(30, 0.05);
  ReferenceOptions opt;
  opt.n_replicates = 100;
  opt.seed = 12;
  opt.perturb = true;
  const ReferenceBands a = sample_reference(e, sigma, 7, opt);
  opt.workers = 4;
  const ReferenceBands b = sample_reference(e, sigma, 7, opt);
  CHECK(a.quantiles == b.quantiles);
  CHECK(a.min_ess_observed == b.min_ess_observed);
  CHECK(a.replicate_members == b.replicate_members);
}

TEST_CASE("convergence floor") {
  ReferenceBands b;
  b.n_mc = 1000;
  b.min_ess_observed = 250.0;
  CHECK(check_convergence(b, 200.0).passed);
  CHECK(check_convergence(b, 0.0).passed);
  b.min_ess_observed = 150.0;
  CHECK_FALSE(check_convergence(b, 200.0).passed);

  const PredictionEnsemble e = test::random_ensemble(20, 10, 5);
  ReferenceOptions opt;
  opt.n_replicates = 20;
  const ReferenceBands small = sample_reference(e, std::vector<double>(10, 0.1), 3, opt);
  CHECK(small.min_ess_observed >= 1.0);
  CHECK(small.min_ess_observed <= 19.0);
  const ConvergenceReport rep = check_convergence(small, 200.0);
  CHECK_FALSE(rep.passed);
  CHECK(rep.diagnostic.find("exceeds") != std::string::npos);
  CHECK(check_convergence(small, 0.0).passed);

  CHECK(default_ess_floor(2000) == 20.0);
  CHECK(default_ess_floor(500) == 10.0);
}

TEST_CASE("reference input validation") {
  const PredictionEnsemble e = test::random_ensemble(5, 10, 1);
  ReferenceOptions opt;
  opt.n_replicates = 1;
  CHECK_THROWS_AS(sample_reference(e, std::vector<double>(10, 0.1), 3, opt),
                  ValidationError);
  opt.n_replicates = 10;
  CHECK_THROWS_AS(sample_reference(e, std::vector<double>(9, 0.1), 3, opt),
                  ValidationError);
  CHECK_THROWS_AS(sample_reference(e, std::vector<double>(10, 0.1), 11, opt),
                  ValidationError);
}
