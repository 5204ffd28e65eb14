#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "mulbench/rng.hpp"
#include "mulbench/stats.hpp"

using namespace mulbench;

TEST_CASE("extract_answer picks the last well-formed integer") {
  CHECK(extract_answer("...Answer: 159201")->to_string() == "159201");
  CHECK_FALSE(extract_answer("no idea").has_value());
  CHECK(extract_answer("maybe 1,692 or so")->to_string() == "1692");
  CHECK(extract_answer("first 47 then 36 finally 1692")->to_string() == "1692");
  CHECK(extract_answer("the result is two thousand four hundred ninety-nine")->to_string() ==
        "2499");
  CHECK(extract_answer("either 12 or forty-seven")->to_string() == "47");
  // Malformed separators fall back to the digit pieces.
  CHECK(extract_answer("odd formatting 16,92")->to_string() == "92");
  // The digit-count hint prefers a matching candidate.
  CHECK(extract_answer("47 times 36 gives 1692 roughly 1700", std::nullopt)->to_string() ==
        "1700");
  CHECK(extract_answer("47 times 36 gives 1692 roughly 170", 4u)->to_string() == "1692");
  CHECK_FALSE(extract_answer("").has_value());
}

namespace {

std::vector<BinaryObs> simulate_logistic(double b0, double b1, std::size_t n,
                                         std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<BinaryObs> data;
  data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = static_cast<double>(rng.next_below(120)) + 1.0;
    double p = logistic(b0 + b1 * x);
    data.push_back({x, rng.next_unit() < p});
  }
  return data;
}

}  // namespace

TEST_CASE("logistic fit recovers synthetic coefficients within 10 percent") {
  auto data = simulate_logistic(4.0, -0.08, 5000, 99);
  LogisticFit fit = fit_logistic(data);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.beta0 - 4.0) / 4.0 < 0.10);
  CHECK(std::abs(fit.beta1 + 0.08) / 0.08 < 0.10);
  REQUIRE(fit.c50.has_value());
  CHECK(std::abs(*fit.c50 - 50.0) < 5.0);
  CHECK(fit.r2_corr > 0.2);
  CHECK(fit.r2_mcfadden > 0.2);
}

TEST_CASE("c50 properties") {
  // beta0 = 5, beta1 = -0.1 -> c50 = 50 exactly.
  LogisticFit fit;
  fit.beta0 = 5;
  fit.beta1 = -0.1;
  fit.converged = true;
  CHECK(-fit.beta0 / fit.beta1 == doctest::Approx(50.0));
  // Rescaling load by k scales beta1 by 1/k and c50 by k.
  auto data = simulate_logistic(4.0, -0.08, 4000, 7);
  auto scaled = data;
  for (auto& obs : scaled) obs.x *= 10.0;
  LogisticFit f1 = fit_logistic(data);
  LogisticFit f2 = fit_logistic(scaled);
  REQUIRE(f1.converged);
  REQUIRE(f2.converged);
  CHECK(f2.beta1 == doctest::Approx(f1.beta1 / 10.0).epsilon(0.02));
  CHECK(*f2.c50 == doctest::Approx(*f1.c50 * 10.0).epsilon(0.02));
}

TEST_CASE("logistic fit flags single-class data instead of crashing") {
  std::vector<BinaryObs> all_correct;
  for (int i = 0; i < 50; ++i) all_correct.push_back({static_cast<double>(i), true});
  LogisticFit fit = fit_logistic(all_correct);
  CHECK(fit.separated);
  CHECK_FALSE(fit.converged);
  std::vector<BinaryObs> tiny = {{1, true}, {2, false}};
  CHECK_THROWS_AS(fit_logistic(tiny), std::invalid_argument);
}

TEST_CASE("parametric bootstrap: refitting data from the fitted model agrees") {
  auto data = simulate_logistic(3.0, -0.05, 4000, 21);
  LogisticFit fit = fit_logistic(data);
  REQUIRE(fit.converged);
  SplitMix64 rng(22);
  std::vector<BinaryObs> regen;
  for (const auto& obs : data)
    regen.push_back({obs.x, rng.next_unit() < predict_probability(fit, obs.x)});
  LogisticFit refit = fit_logistic(regen);
  REQUIRE(refit.converged);
  CHECK(std::abs(refit.beta0 - fit.beta0) < 0.5);
  CHECK(std::abs(refit.beta1 - fit.beta1) < 0.02);
}

TEST_CASE("r_squared boundary behavior") {
  std::vector<BinaryObs> data;
  // Perfectly separated monotone data fitted by a steep curve.
  for (int i = 0; i < 30; ++i) data.push_back({static_cast<double>(i), i < 15});
  LogisticFit steep;
  steep.beta0 = 60;
  steep.beta1 = -4.1;
  steep.converged = true;
  CHECK(r_squared(steep, data) > 0.95);
  // Constant predictions have zero variance.
  LogisticFit flat;
  flat.beta0 = 0.3;
  flat.beta1 = 0.0;
  CHECK(r_squared(flat, data) == 0.0);
}

TEST_CASE("standard errors") {
  CHECK(binomial_se(0.5, 100) == doctest::Approx(0.05));
  CHECK(binomial_se(0.0, 50) == 0.0);
  CHECK(binomial_se(1.0, 50) == 0.0);
  // Mean SE: std({1,2,3}) / sqrt(3) with the sample standard deviation.
  double se = standard_error(SeKind::Mean, {1.0, 2.0, 3.0});
  CHECK(se == doctest::Approx(1.0 / std::sqrt(3.0)));
  double bse = standard_error(SeKind::Binomial, {1, 1, 0, 0});
  CHECK(bse == doctest::Approx(0.25));
  CHECK_THROWS(standard_error(SeKind::Mean, {}));
}

TEST_CASE("error-rate model recovers p within 15 percent") {
  SplitMix64 rng(1001);
  std::vector<OpsObs> data;
  const double p = 0.01;
  for (int i = 0; i < 20000; ++i) {
    double n_ops = static_cast<double>(4 + rng.next_below(200));
    double p_correct = std::pow(1.0 - p, n_ops);
    data.push_back({n_ops, rng.next_unit() < p_correct});
  }
  ErrorRateFit fit = fit_error_rate(data, "C");
  CHECK(std::abs(fit.p - p) / p < 0.15);
  CHECK(fit.ops_proxy == "C");
  CHECK(fit.n_buckets > 0);
}

TEST_CASE("error-rate model handles perfect accuracy and dead buckets") {
  std::vector<OpsObs> perfect;
  for (int i = 0; i < 100; ++i) perfect.push_back({static_cast<double>(1 + i % 10), true});
  ErrorRateFit fit = fit_error_rate(perfect, "C");
  CHECK(fit.p == doctest::Approx(0.0));
  // An all-zero bucket is excluded with a count rather than poisoning the fit.
  std::vector<OpsObs> with_dead = perfect;
  with_dead.push_back({500.0, false});
  ErrorRateFit fit2 = fit_error_rate(with_dead, "C");
  CHECK(fit2.n_excluded == 1);
  CHECK(fit2.p == doctest::Approx(0.0));
}
