#include "mulbench/backend.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "mulbench/rng.hpp"
#include "mulbench/sha256.hpp"

namespace mulbench {

using nlohmann::json;

std::string ScoringContext::digest() const {
  Sha256 h;
  auto field = [&h](std::string_view s) {
    std::string len = std::to_string(s.size());
    h.update(len);
    h.update("\x1f");
    h.update(s);
  };
  field(system);
  field(prompt);
  field(image);
  field(image_media_type);
  field(audio);
  field(audio_media_type);
  return h.hex_digest();
}

std::vector<std::string> mock_tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

// ---- mock spec ----

MockSpec MockSpec::parse_json(const std::string& text) {
  json j = json::parse(text);
  MockSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  spec.value = j.value("value", spec.value);
  spec.seed = j.value("seed", spec.seed);
  spec.lo = j.value("lo", spec.lo);
  spec.hi = j.value("hi", spec.hi);
  spec.keyword_default = j.value("default", spec.keyword_default);
  spec.p = j.value("p", spec.p);
  spec.score_capable = j.value("score_capable", spec.score_capable);
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules"))
      spec.keyword_rules.emplace_back(r.at(0).get<std::string>(), r.at(1).get<double>());
  }
  if (j.contains("table")) {
    for (const auto& e : j.at("table")) {
      TableEntry entry;
      entry.context_digest = e.at("context_digest").get<std::string>();
      entry.continuation = e.at("continuation").get<std::string>();
      entry.losses = e.at("losses").get<std::vector<double>>();
      spec.table.push_back(std::move(entry));
    }
  }
  static const std::vector<std::string> kinds = {"constant", "hash", "keyword", "table",
                                                 "generative"};
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end())
    throw std::invalid_argument("mock spec: unknown kind '" + spec.kind + "'");
  return spec;
}

std::string MockSpec::to_json() const {
  json j;
  j["kind"] = kind;
  j["value"] = value;
  j["seed"] = seed;
  j["lo"] = lo;
  j["hi"] = hi;
  j["default"] = keyword_default;
  j["p"] = p;
  j["score_capable"] = score_capable;
  if (!keyword_rules.empty()) {
    json rules = json::array();
    for (const auto& [k, v] : keyword_rules) rules.push_back(json::array({k, v}));
    j["rules"] = rules;
  }
  if (!table.empty()) {
    json entries = json::array();
    for (const auto& e : table)
      entries.push_back({{"context_digest", e.context_digest},
                         {"continuation", e.continuation},
                         {"losses", e.losses}});
    j["table"] = entries;
  }
  return j.dump();
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockSpec spec) : spec_(std::move(spec)) {}

  std::string name() const override { return "mock:" + spec_.kind; }
  bool can_score() const override { return spec_.score_capable; }

  void register_context(const ScoringContext& ctx, const Problem& problem) override {
    RegisteredProblem info;
    info.a = problem.a.to_string();
    info.b = problem.b.to_string();
    info.product = problem.product.to_string();
    info.load_C = compute_load(problem.a, problem.b).load_C;
    problems_[ctx.digest()] = std::move(info);
  }

  GenerationResult generate(const ScoringContext& ctx, std::size_t budget) override {
    std::string text = full_completion(ctx);
    std::vector<std::string> tokens = mock_tokenize(text);
    GenerationResult out;
    if (tokens.size() > budget) {
      tokens.resize(budget);
      out.finish_reason = "length";
    } else {
      out.finish_reason = "stop";
    }
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) joined += ' ';
      joined += tokens[i];
    }
    out.text = joined;
    out.completion_tokens = tokens.size();
    return out;
  }

  TokenLosses score_continuation(const ScoringContext& ctx,
                                 const std::string& continuation) override {
    if (!spec_.score_capable)
      throw CapabilityError("mock backend configured without continuation scoring");
    if (continuation.empty())
      throw std::invalid_argument("score_continuation: empty continuation");
    std::vector<std::string> tokens = mock_tokenize(continuation);
    if (tokens.empty()) throw std::invalid_argument("score_continuation: blank continuation");
    TokenLosses out;
    out.losses.reserve(tokens.size());
    const std::string digest = ctx.digest();
    if (spec_.kind == "constant") {
      out.losses.assign(tokens.size(), spec_.value);
    } else if (spec_.kind == "keyword") {
      double loss = spec_.keyword_default;
      for (const auto& [needle, value] : spec_.keyword_rules) {
        if (continuation.find(needle) != std::string::npos) {
          loss = value;
          break;
        }
      }
      out.losses.assign(tokens.size(), loss);
    } else if (spec_.kind == "table") {
      for (const auto& entry : spec_.table) {
        if (entry.context_digest == digest && entry.continuation == continuation) {
          out.losses = entry.losses;
          return out;
        }
      }
      throw std::runtime_error("table mock: no entry for this context/continuation");
    } else {  // hash, generative
      for (const auto& token : tokens) out.losses.push_back(hash_loss(digest, token));
    }
    return out;
  }

 private:
  struct RegisteredProblem {
    std::string a, b;
    std::string product;
    std::size_t load_C = 0;
  };

  double hash_loss(const std::string& digest, const std::string& token) const {
    std::uint64_t h = fnv1a(token, fnv1a(digest, fnv1a("loss") ^ spec_.seed));
    SplitMix64 rng(h);
    return spec_.lo + (spec_.hi - spec_.lo) * rng.next_unit();
  }

  std::string full_completion(const ScoringContext& ctx) const {
    if (spec_.kind != "generative") return "mock completion text";
    auto it = problems_.find(ctx.digest());
    if (it == problems_.end()) return "I cannot determine the problem.";
    const RegisteredProblem& info = it->second;
    if (ctx.prompt.rfind("Transcribe", 0) == 0) return info.a + " " + info.b;
    SplitMix64 rng(fnv1a(ctx.digest(), fnv1a("gen") ^ spec_.seed));
    double p_correct = std::pow(1.0 - spec_.p, static_cast<double>(info.load_C));
    if (rng.next_unit() < p_correct) return "The answer is " + info.product + ".";
    // Wrong by a digit-preserving slip on the last digit.
    std::string wrong = info.product;
    char& last = wrong.back();
    last = last == '9' ? '1' : static_cast<char>(last + 1);
    return "The answer is " + wrong + ".";
  }

  MockSpec spec_;
  std::map<std::string, RegisteredProblem> problems_;
};

}  // namespace

std::unique_ptr<Backend> mock_backend(const MockSpec& spec) {
  return std::make_unique<MockBackend>(spec);
}

// ---- replay cache ----

std::shared_ptr<ReplayCache> ReplayCache::load(const std::string& path) {
  auto cache = std::make_shared<ReplayCache>();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("replay cache: cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    cache->entries_[j.at("key").get<std::string>()] = {j.at("request").get<std::string>(),
                                                       j.at("response").get<std::string>()};
  }
  return cache;
}

void ReplayCache::save(const std::string& path) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("replay cache: cannot write " + path);
  for (const auto& [key, rr] : entries_) {
    json j;
    j["key"] = key;
    j["request"] = rr.first;
    j["response"] = rr.second;
    out << j.dump() << "\n";
  }
}

std::optional<std::string> ReplayCache::lookup(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.second;
}

bool ReplayCache::record(const std::string& key, const std::string& request_json,
                         const std::string& response_json) {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.emplace(key, std::make_pair(request_json, response_json)).second;
}

std::size_t ReplayCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

// ---- canonical requests & wire helpers ----

std::string base64_encode(std::string_view data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < data.size()) {
    std::uint32_t v = (static_cast<std::uint8_t>(data[i]) << 16) |
                      (static_cast<std::uint8_t>(data[i + 1]) << 8) |
                      static_cast<std::uint8_t>(data[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == data.size()) {
    std::uint32_t v = static_cast<std::uint8_t>(data[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    std::uint32_t v = (static_cast<std::uint8_t>(data[i]) << 16) |
                      (static_cast<std::uint8_t>(data[i + 1]) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out += "=";
  }
  return out;
}

namespace {

json user_content(const ScoringContext& ctx) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", ctx.prompt}});
  if (ctx.has_image()) {
    std::string url = "data:" + ctx.image_media_type + ";base64," + base64_encode(ctx.image);
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  if (ctx.has_audio()) {
    content.push_back(
        {{"type", "input_audio"},
         {"input_audio", {{"data", base64_encode(ctx.audio)}, {"format", "wav"}}}});
  }
  return content;
}

json base_messages(const ScoringContext& ctx) {
  json messages = json::array();
  if (!ctx.system.empty()) messages.push_back({{"role", "system"}, {"content", ctx.system}});
  messages.push_back({{"role", "user"}, {"content", user_content(ctx)}});
  return messages;
}

}  // namespace

std::string build_generate_request(const ScoringContext& ctx, std::size_t budget,
                                   const std::string& model) {
  json j;
  j["model"] = model;
  j["temperature"] = 0.0;
  j["max_tokens"] = budget;
  j["messages"] = base_messages(ctx);
  return j.dump();
}

std::string build_score_request(const ScoringContext& ctx, const std::string& continuation,
                                const std::string& model) {
  json j;
  j["model"] = model;
  j["temperature"] = 0.0;
  j["max_tokens"] = 0;
  json messages = base_messages(ctx);
  messages.push_back({{"role", "assistant"}, {"content", continuation}});
  j["messages"] = messages;
  j["logprobs"] = true;
  j["scoring"] = {{"mode", "continuation_logprobs"}};
  return j.dump();
}

std::string request_cache_key(const std::string& request_json) {
  return Sha256::hash_hex(request_json);
}

// ---- replay / recording backends ----

namespace {

json generation_to_json(const GenerationResult& r) {
  return json{{"text", r.text},
              {"finish_reason", r.finish_reason},
              {"completion_tokens", r.completion_tokens}};
}

GenerationResult generation_from_json(const json& j) {
  GenerationResult r;
  r.text = j.at("text").get<std::string>();
  r.finish_reason = j.at("finish_reason").get<std::string>();
  r.completion_tokens = j.at("completion_tokens").get<std::size_t>();
  return r;
}

class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<ReplayCache> cache) : cache_(std::move(cache)) {}
  std::string name() const override { return "replay"; }
  bool can_score() const override { return true; }

  GenerationResult generate(const ScoringContext& ctx, std::size_t budget) override {
    std::string request = build_generate_request(ctx, budget, "replay");
    auto hit = cache_->lookup(request_cache_key(request));
    if (!hit) throw ReplayMissError("replay cache has no entry for this generate request");
    return generation_from_json(json::parse(*hit));
  }

  TokenLosses score_continuation(const ScoringContext& ctx,
                                 const std::string& continuation) override {
    std::string request = build_score_request(ctx, continuation, "replay");
    auto hit = cache_->lookup(request_cache_key(request));
    if (!hit) throw ReplayMissError("replay cache has no entry for this score request");
    TokenLosses out;
    out.losses = json::parse(*hit).at("losses").get<std::vector<double>>();
    return out;
  }

 private:
  std::shared_ptr<ReplayCache> cache_;
};

class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::unique_ptr<Backend> inner, std::shared_ptr<ReplayCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string name() const override { return inner_->name() + "+record"; }
  bool can_score() const override { return inner_->can_score(); }
  void register_context(const ScoringContext& ctx, const Problem& p) override {
    inner_->register_context(ctx, p);
  }

  GenerationResult generate(const ScoringContext& ctx, std::size_t budget) override {
    // Keyed on the replay-normalized request so replay runs resolve the same
    // entries regardless of the live backend's model name.
    std::string request = build_generate_request(ctx, budget, "replay");
    std::string key = request_cache_key(request);
    if (auto hit = cache_->lookup(key)) return generation_from_json(json::parse(*hit));
    GenerationResult result = inner_->generate(ctx, budget);
    cache_->record(key, request, generation_to_json(result).dump());
    return result;
  }

  TokenLosses score_continuation(const ScoringContext& ctx,
                                 const std::string& continuation) override {
    std::string request = build_score_request(ctx, continuation, "replay");
    std::string key = request_cache_key(request);
    if (auto hit = cache_->lookup(key)) {
      TokenLosses out;
      out.losses = json::parse(*hit).at("losses").get<std::vector<double>>();
      return out;
    }
    TokenLosses result = inner_->score_continuation(ctx, continuation);
    cache_->record(key, request, json{{"losses", result.losses}}.dump());
    return result;
  }

 private:
  std::unique_ptr<Backend> inner_;
  std::shared_ptr<ReplayCache> cache_;
};

// ---- HTTP backend ----

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (!config_.sleeper) config_.sleeper = [](int) {};
  }
  std::string name() const override { return "http:" + config_.model; }
  bool can_score() const override { return config_.score_capable; }

  GenerationResult generate(const ScoringContext& ctx, std::size_t budget) override {
    json response = post(build_generate_request(ctx, budget, config_.model));
    const json& choice = first_choice(response);
    GenerationResult out;
    if (choice.contains("message"))
      out.text = choice.at("message").value("content", std::string{});
    else
      out.text = choice.value("text", std::string{});
    out.finish_reason = choice.value("finish_reason", "stop");
    if (response.contains("usage"))
      out.completion_tokens = response["usage"].value("completion_tokens", std::size_t{0});
    return out;
  }

  TokenLosses score_continuation(const ScoringContext& ctx,
                                 const std::string& continuation) override {
    if (!config_.score_capable)
      throw CapabilityError("backend " + name() + " is configured as probe-incapable");
    if (continuation.empty())
      throw std::invalid_argument("score_continuation: empty continuation");
    json response = post(build_score_request(ctx, continuation, config_.model));
    const json& choice = first_choice(response);
    if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
        !choice["logprobs"].contains("content"))
      throw CapabilityError("backend " + name() + " did not echo continuation logprobs");
    TokenLosses out;
    for (const auto& tok : choice["logprobs"]["content"]) {
      double lp = tok.at("logprob").get<double>();
      out.losses.push_back(lp < 0 ? -lp : 0.0);
    }
    if (out.losses.empty())
      throw CapabilityError("backend " + name() + " returned an empty logprob list");
    return out;
  }

 private:
  static const json& first_choice(const json& response) {
    if (!response.contains("choices") || response["choices"].empty())
      throw std::runtime_error("backend response has no choices");
    return response["choices"][0];
  }

  json post(const std::string& body) {
    httplib::Client client(config_.endpoint);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    std::string last_error;
    for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
      if (attempt > 0)
        config_.sleeper(config_.retry.base_delay_ms * (1 << (attempt - 1)));
      auto res = client.Post("/v1/chat/completions", headers, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "server error " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw std::runtime_error("backend returned status " + std::to_string(res->status) +
                                 ": " + res->body);
      return json::parse(res->body);
    }
    throw std::runtime_error("backend unreachable after " +
                             std::to_string(config_.retry.max_attempts) +
                             " attempts: " + last_error);
  }

  HttpBackendConfig config_;
};

}  // namespace

std::unique_ptr<Backend> replay_backend(std::shared_ptr<ReplayCache> cache) {
  return std::make_unique<ReplayBackend>(std::move(cache));
}

std::unique_ptr<Backend> recording_backend(std::unique_ptr<Backend> inner,
                                           std::shared_ptr<ReplayCache> cache) {
  return std::make_unique<RecordingBackend>(std::move(inner), std::move(cache));
}

std::unique_ptr<Backend> http_backend(const HttpBackendConfig& config) {
  return std::make_unique<HttpBackend>(config);
}

}  // namespace mulbench
