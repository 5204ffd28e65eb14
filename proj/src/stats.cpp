#include "mulbench/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mulbench/words.hpp"

namespace mulbench {

namespace {

struct Candidate {
  BigNat value;
  std::size_t end_pos;  // byte offset just past the match
};

bool strict_separator_form(const std::string& run) {
  // \d{1,3}(,\d{3})+
  std::size_t comma = run.find(',');
  if (comma == std::string::npos || comma == 0 || comma > 3) return false;
  std::size_t pos = comma;
  while (pos < run.size()) {
    if (run[pos] != ',') return false;
    if (pos + 4 > run.size()) return false;
    for (int i = 1; i <= 3; ++i)
      if (!std::isdigit(static_cast<unsigned char>(run[pos + i]))) return false;
    pos += 4;
  }
  return true;
}

void collect_numeral_candidates(const std::string& text, std::vector<Candidate>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == ','))
      ++i;
    std::string run = text.substr(start, i - start);
    while (!run.empty() && run.back() == ',') run.pop_back();
    if (run.empty()) continue;
    if (run.find(',') == std::string::npos) {
      out.push_back({BigNat::from_decimal(run), start + run.size()});
    } else if (strict_separator_form(run)) {
      std::string digits;
      for (char c : run)
        if (c != ',') digits.push_back(c);
      out.push_back({BigNat::from_decimal(digits), start + run.size()});
    } else {
      // Malformed separators: each all-digit piece stands alone.
      std::size_t piece_start = start;
      std::string piece;
      for (std::size_t k = 0; k <= run.size(); ++k) {
        if (k < run.size() && run[k] != ',') {
          if (piece.empty()) piece_start = start + k;
          piece.push_back(run[k]);
        } else if (!piece.empty()) {
          out.push_back({BigNat::from_decimal(piece), piece_start + piece.size()});
          piece.clear();
        }
      }
    }
  }
}

bool is_number_word(const std::string& token) {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w = {"zero", "hundred"};
    for (std::uint64_t v : {1ull, 2ull, 3ull, 4ull, 5ull, 6ull, 7ull, 8ull, 9ull, 10ull, 11ull,
                            12ull, 13ull, 14ull, 15ull, 16ull, 17ull, 18ull, 19ull, 20ull,
                            30ull, 40ull, 50ull, 60ull, 70ull, 80ull, 90ull})
      w.push_back(to_words_u64(v));
    for (std::uint64_t shift = 3; shift <= 30; shift += 3)
      w.push_back(word_tokens(to_words(BigNat(1).shifted_pow10(shift)))[1]);
    return w;
  }();
  return std::find(words.begin(), words.end(), token) != words.end();
}

void collect_word_candidates(const std::string& text, std::vector<Candidate>& out) {
  struct Tok {
    std::string word;
    std::size_t end;
  };
  std::vector<Tok> toks;
  std::string cur;
  std::size_t cur_end = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    char c = i < text.size() ? text[i] : ' ';
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      cur_end = i + 1;
    } else if (!cur.empty()) {
      toks.push_back({cur, cur_end});
      cur.clear();
    }
  }
  std::size_t i = 0;
  while (i < toks.size()) {
    if (!is_number_word(toks[i].word)) {
      ++i;
      continue;
    }
    // Longest run starting here that parses as a single number.
    std::size_t best_end_tok = 0;
    BigNat best_value;
    bool found = false;
    std::string phrase;
    for (std::size_t j = i; j < toks.size() && is_number_word(toks[j].word); ++j) {
      if (!phrase.empty()) phrase += ' ';
      phrase += toks[j].word;
      if (auto value = parse_words(phrase)) {
        best_value = *value;
        best_end_tok = j;
        found = true;
      }
    }
    if (found) {
      out.push_back({best_value, toks[best_end_tok].end});
      i = best_end_tok + 1;
    } else {
      ++i;
    }
  }
}

}  // namespace

std::vector<BigNat> extract_integers(const std::string& completion) {
  std::vector<Candidate> candidates;
  collect_numeral_candidates(completion, candidates);
  collect_word_candidates(completion, candidates);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.end_pos < b.end_pos; });
  std::vector<BigNat> out;
  for (auto& c : candidates) out.push_back(std::move(c.value));
  return out;
}

std::optional<BigNat> extract_answer(const std::string& completion,
                                     std::optional<std::size_t> digit_count_hint) {
  std::vector<Candidate> candidates;
  collect_numeral_candidates(completion, candidates);
  collect_word_candidates(completion, candidates);
  if (candidates.empty()) return std::nullopt;
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.end_pos < b.end_pos; });
  if (digit_count_hint) {
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it)
      if (it->value.digit_count() == *digit_count_hint) return it->value;
  }
  return candidates.back().value;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double predict_probability(const LogisticFit& fit, double load) {
  return logistic(fit.beta0 + fit.beta1 * load);
}

namespace {

constexpr double kBetaCap = 30.0;

double log_likelihood(const std::vector<BinaryObs>& data, double b0, double b1) {
  double ll = 0;
  for (const auto& obs : data) {
    double p = logistic(b0 + b1 * obs.x);
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    ll += obs.y ? std::log(p) : std::log(1.0 - p);
  }
  return ll;
}

}  // namespace

LogisticFit fit_logistic(const std::vector<BinaryObs>& data) {
  LogisticFit fit;
  fit.n = data.size();
  std::size_t positives = 0;
  for (const auto& obs : data)
    if (obs.y) ++positives;
  if (data.size() < 10 || positives == 0 || positives == data.size()) {
    if (data.size() < 10)
      throw std::invalid_argument("fit_logistic: need at least 10 observations");
    // Single-class data: complete separation by definition.
    fit.separated = true;
    fit.converged = false;
    fit.beta0 = positives == data.size() ? kBetaCap : -kBetaCap;
    fit.beta1 = 0;
    return fit;
  }

  double b0 = 0, b1 = 0;
  double prev_ll = log_likelihood(data, b0, b1);
  for (int iter = 1; iter <= 100; ++iter) {
    fit.iterations = iter;
    // Accumulate X^T W X and X^T (y - p) for X = [1, x].
    double s00 = 0, s01 = 0, s11 = 0, g0 = 0, g1 = 0;
    for (const auto& obs : data) {
      double p = logistic(b0 + b1 * obs.x);
      double w = std::max(p * (1.0 - p), 1e-12);
      double r = (obs.y ? 1.0 : 0.0) - p;
      s00 += w;
      s01 += w * obs.x;
      s11 += w * obs.x * obs.x;
      g0 += r;
      g1 += r * obs.x;
    }
    double det = s00 * s11 - s01 * s01;
    if (std::abs(det) < 1e-12) {
      fit.separated = true;
      break;
    }
    b0 += (s11 * g0 - s01 * g1) / det;
    b1 += (-s01 * g0 + s00 * g1) / det;
    if (std::abs(b0) > kBetaCap * 4 || std::abs(b1) > kBetaCap) {
      fit.separated = true;
      break;
    }
    double ll = log_likelihood(data, b0, b1);
    if (std::abs(ll - prev_ll) < 1e-8) {
      fit.converged = true;
      prev_ll = ll;
      break;
    }
    prev_ll = ll;
  }
  fit.beta0 = std::clamp(b0, -kBetaCap * 4, kBetaCap * 4);
  fit.beta1 = std::clamp(b1, -kBetaCap, kBetaCap);
  if (fit.separated) fit.converged = false;
  if (fit.beta1 != 0) fit.c50 = -fit.beta0 / fit.beta1;

  if (fit.converged) {
    fit.r2_corr = r_squared(fit, data);
    double p_bar = static_cast<double>(positives) / static_cast<double>(data.size());
    double ll_null = 0;
    for (const auto& obs : data) ll_null += obs.y ? std::log(p_bar) : std::log(1.0 - p_bar);
    double ll_full = log_likelihood(data, fit.beta0, fit.beta1);
    fit.r2_mcfadden = ll_null != 0 ? std::clamp(1.0 - ll_full / ll_null, 0.0, 1.0) : 0.0;
  }
  return fit;
}

double r_squared(const LogisticFit& fit, const std::vector<BinaryObs>& data) {
  if (data.empty()) return 0;
  double mean_p = 0, mean_y = 0;
  for (const auto& obs : data) {
    mean_p += predict_probability(fit, obs.x);
    mean_y += obs.y ? 1.0 : 0.0;
  }
  mean_p /= static_cast<double>(data.size());
  mean_y /= static_cast<double>(data.size());
  double spp = 0, syy = 0, spy = 0;
  for (const auto& obs : data) {
    double dp = predict_probability(fit, obs.x) - mean_p;
    double dy = (obs.y ? 1.0 : 0.0) - mean_y;
    spp += dp * dp;
    syy += dy * dy;
    spy += dp * dy;
  }
  if (spp <= 0 || syy <= 0) return 0;  // zero-variance predictions
  return (spy * spy) / (spp * syy);
}

double binomial_se(double p, std::size_t n) {
  if (n == 0) throw std::invalid_argument("binomial_se: n must be >= 1");
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double standard_error(SeKind kind, const std::vector<double>& data) {
  if (data.empty()) throw std::invalid_argument("standard_error: empty data");
  double n = static_cast<double>(data.size());
  if (kind == SeKind::Binomial) {
    double p = 0;
    for (double v : data) p += v;
    p /= n;
    return std::sqrt(p * (1.0 - p) / n);
  }
  double mean = 0;
  for (double v : data) mean += v;
  mean /= n;
  if (data.size() < 2) return 0;
  double ss = 0;
  for (double v : data) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1));
  return sd / std::sqrt(n);
}

ErrorRateFit fit_error_rate(const std::vector<OpsObs>& data, const std::string& proxy_name) {
  std::map<double, std::pair<std::size_t, std::size_t>> buckets;  // ops -> (correct, total)
  for (const auto& obs : data) {
    auto& [correct, total] = buckets[obs.n_ops];
    if (obs.correct) ++correct;
    ++total;
  }
  ErrorRateFit fit;
  fit.ops_proxy = proxy_name;
  double num = 0, den = 0;
  for (const auto& [ops, counts] : buckets) {
    double acc = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    if (acc <= 0) {
      ++fit.n_excluded;  // log(0) undefined; bucket dropped with a warning count
      continue;
    }
    ++fit.n_buckets;
    num += -ops * std::log(acc);
    den += ops * ops;
  }
  fit.p = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
  return fit;
}

}  // namespace mulbench
