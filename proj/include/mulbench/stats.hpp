#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mulbench/bigint.hpp"

namespace mulbench {

struct AccuracyRecord {
  std::string problem_id;
  std::string representation;
  double load_C = 0;
  bool correct = false;
  std::optional<BigNat> extracted_answer;
};

// Last well-formed integer in the completion: plain numerals, numerals with
// strict thousands separators, or a number-word phrase. The optional hint
// prefers the last candidate with that many digits when one exists.
std::optional<BigNat> extract_answer(const std::string& completion,
                                     std::optional<std::size_t> digit_count_hint = std::nullopt);

// Every well-formed integer in the completion, in order of appearance; used
// by the perception (transcription) check.
std::vector<BigNat> extract_integers(const std::string& completion);

struct LogisticFit {
  double beta0 = 0;  // intercept
  double beta1 = 0;  // slope per unit load
  std::optional<double> c50;  // -beta0/beta1 when beta1 != 0
  double r2_corr = 0;      // squared Pearson correlation (primary)
  double r2_mcfadden = 0;  // reported alongside
  std::size_t n = 0;
  bool converged = false;
  bool separated = false;
  int iterations = 0;
};

struct BinaryObs {
  double x = 0;  // load
  bool y = false;
};

// Maximum-likelihood logistic regression via iteratively reweighted least
// squares; tolerance 1e-8 on the log-likelihood, at most 100 iterations.
// Complete separation (or single-class data) is flagged and the coefficients
// capped rather than diverging.
LogisticFit fit_logistic(const std::vector<BinaryObs>& data);

double logistic(double z);
double predict_probability(const LogisticFit& fit, double load);

// Squared Pearson correlation between predicted probabilities and outcomes;
// defined as 0 for zero-variance predictions. Requires a converged fit.
double r_squared(const LogisticFit& fit, const std::vector<BinaryObs>& data);

enum class SeKind { Binomial, Mean };
double standard_error(SeKind kind, const std::vector<double>& data);
double binomial_se(double p, std::size_t n);

struct ErrorRateFit {
  double p = 0;  // per-primitive-operation failure probability
  std::string ops_proxy;
  std::size_t n_buckets = 0;
  std::size_t n_excluded = 0;  // all-zero accuracy buckets
};

struct OpsObs {
  double n_ops = 0;
  bool correct = false;
};

// Least-squares fit of log(accuracy) = -p * N_ops over per-ops-bucket means;
// p clipped to [0, 1].
ErrorRateFit fit_error_rate(const std::vector<OpsObs>& data, const std::string& proxy_name);

}  // namespace mulbench
