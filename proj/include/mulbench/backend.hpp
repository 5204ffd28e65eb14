#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mulbench/operand.hpp"

namespace mulbench {

struct ScoringContext {
  std::string system;  // system preamble
  std::string prompt;  // user text
  std::string image;   // optional payload bytes
  std::string image_media_type;
  std::string audio;   // optional payload bytes (WAV)
  std::string audio_media_type;

  bool has_image() const { return !image.empty(); }
  bool has_audio() const { return !audio.empty(); }
  // Stable content digest over every field; keys mocks and replay lookups.
  std::string digest() const;
};

struct TokenLosses {
  std::vector<double> losses;  // continuation tokens only, all >= 0 and finite
  std::size_t token_count() const { return losses.size(); }
};

struct GenerationResult {
  std::string text;
  std::string finish_reason;  // "stop" | "length"
  std::size_t completion_tokens = 0;
};

// Raised when a backend cannot echo continuation logprobs; the probe pipeline
// reports such a backend as probe-incapable instead of silently generating.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual bool can_score() const = 0;
  // Deterministic decoding (temperature 0); budget caps continuation tokens.
  virtual GenerationResult generate(const ScoringContext& ctx, std::size_t budget) = 0;
  virtual TokenLosses score_continuation(const ScoringContext& ctx,
                                         const std::string& continuation) = 0;
  // Mock-support hook: tells answer-simulating backends which problem a
  // context renders. Real backends ignore it.
  virtual void register_context(const ScoringContext& ctx, const Problem& problem) {
    (void)ctx;
    (void)problem;
  }
};

// Whitespace tokenization used by the mock family; the token count reported
// to callers is the backend's own.
std::vector<std::string> mock_tokenize(const std::string& text);

struct MockSpec {
  std::string kind;  // constant | hash | keyword | table | generative
  double value = 1.0;                       // constant
  std::uint64_t seed = 0;                   // hash, generative
  double lo = 0.5, hi = 4.0;                // hash loss range
  std::vector<std::pair<std::string, double>> keyword_rules;  // keyword
  double keyword_default = 2.0;
  struct TableEntry {
    std::string context_digest;
    std::string continuation;
    std::vector<double> losses;
  };
  std::vector<TableEntry> table;            // table
  double p = 0.02;                          // generative per-op failure prob
  bool score_capable = true;

  static MockSpec parse_json(const std::string& text);
  std::string to_json() const;
};

std::unique_ptr<Backend> mock_backend(const MockSpec& spec);

// ---- replay cache ----

struct ReplayMissError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Append-only JSONL archive of raw request/response pairs keyed by the
// request content hash. Readers share an immutable snapshot; writes are
// serialized and the first response recorded for a key wins.
class ReplayCache {
 public:
  ReplayCache() = default;
  static std::shared_ptr<ReplayCache> load(const std::string& path);
  void save(const std::string& path) const;

  std::optional<std::string> lookup(const std::string& key) const;
  // Returns false when the key was already present (first response wins).
  bool record(const std::string& key, const std::string& request_json,
              const std::string& response_json);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::pair<std::string, std::string>> entries_;
};

// Serves archived responses; any miss is an error (offline replay contract).
std::unique_ptr<Backend> replay_backend(std::shared_ptr<ReplayCache> cache);

// Passes through to `inner`, archiving every request/response pair.
std::unique_ptr<Backend> recording_backend(std::unique_ptr<Backend> inner,
                                           std::shared_ptr<ReplayCache> cache);

// ---- HTTP backend (chat-completions convention) ----

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 100;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::string api_key;
  std::string model = "default";
  RetryPolicy retry;
  bool score_capable = true;
  // Injectable so tests do not sleep through backoff.
  std::function<void(int /*ms*/)> sleeper;
};

std::unique_ptr<Backend> http_backend(const HttpBackendConfig& config);

// Canonical request bodies, shared by the live backend and replay keying.
std::string build_generate_request(const ScoringContext& ctx, std::size_t budget,
                                   const std::string& model);
std::string build_score_request(const ScoringContext& ctx, const std::string& continuation,
                                const std::string& model);
std::string request_cache_key(const std::string& request_json);

std::string base64_encode(std::string_view data);

}  // namespace mulbench
