#include <doctest.h>

#include <atomic>
#include <memory>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mulbench/backend.hpp"

using namespace mulbench;
using nlohmann::json;

namespace {

// Minimal chat-completions server: deterministic generation, per-token
// logprobs for a supplied assistant continuation, switchable failure modes.
class FakeModelServer {
 public:
  FakeModelServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      if (fail_first_ && requests_.fetch_add(1) == 0) {
        res.status = 503;
        res.set_content("busy", "text/plain");
        return;
      }
      ++served_;
      json body = json::parse(req.body);
      const json& messages = body.at("messages");
      bool has_assistant = false;
      std::string continuation;
      for (const auto& m : messages) {
        if (m.at("role") == "assistant") {
          has_assistant = true;
          continuation = m.at("content").get<std::string>();
        }
      }
      json response;
      if (has_assistant) {
        json choice;
        if (logprob_capable_) {
          json content = json::array();
          auto tokens = mock_tokenize(continuation);
          for (std::size_t i = 0; i < tokens.size(); ++i)
            content.push_back({{"token", tokens[i]},
                               {"logprob", -0.5 - 0.25 * static_cast<double>(i)}});
          choice["logprobs"] = {{"content", content}};
        }
        choice["message"] = {{"role", "assistant"}, {"content", continuation}};
        choice["finish_reason"] = "stop";
        response["choices"] = json::array({choice});
      } else {
        json choice;
        choice["message"] = {{"role", "assistant"}, {"content", "The answer is 1692."}};
        choice["finish_reason"] = "stop";
        response["choices"] = json::array({choice});
        response["usage"] = {{"completion_tokens", 4}};
      }
      res.set_content(response.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeModelServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  void set_fail_first(bool value) { fail_first_ = value; }
  void set_logprob_capable(bool value) { logprob_capable_ = value; }
  int served() const { return served_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> served_{0};
  bool fail_first_ = false;
  bool logprob_capable_ = true;
};

HttpBackendConfig config_for(const FakeModelServer& server) {
  HttpBackendConfig config;
  config.endpoint = server.endpoint();
  config.model = "fake-model";
  config.api_key = "test-key";
  config.sleeper = [](int) {};  // no real backoff in tests
  return config;
}

ScoringContext simple_ctx() {
  ScoringContext ctx;
  ctx.system = "sys";
  ctx.prompt = "What is 47 × 36?";
  return ctx;
}

}  // namespace

TEST_CASE("http backend generates and scores against a live server") {
  FakeModelServer server;
  auto backend = http_backend(config_for(server));
  GenerationResult gen = backend->generate(simple_ctx(), 2048);
  CHECK(gen.text == "The answer is 1692.");
  CHECK(gen.finish_reason == "stop");
  CHECK(gen.completion_tokens == 4);

  TokenLosses losses = backend->score_continuation(simple_ctx(), "alpha beta gamma");
  REQUIRE(losses.token_count() == 3);
  CHECK(losses.losses[0] == doctest::Approx(0.5));
  CHECK(losses.losses[2] == doctest::Approx(1.0));
}

TEST_CASE("http backend retries transient server errors") {
  FakeModelServer server;
  server.set_fail_first(true);
  HttpBackendConfig config = config_for(server);
  int sleeps = 0;
  config.sleeper = [&sleeps](int) { ++sleeps; };
  auto backend = http_backend(config);
  GenerationResult gen = backend->generate(simple_ctx(), 64);
  CHECK(gen.text == "The answer is 1692.");
  CHECK(sleeps == 1);
}

TEST_CASE("http backend without logprobs is a capability error") {
  FakeModelServer server;
  server.set_logprob_capable(false);
  auto backend = http_backend(config_for(server));
  CHECK_THROWS_AS(backend->score_continuation(simple_ctx(), "alpha beta"), CapabilityError);
}

TEST_CASE("unreachable endpoints fail after bounded retries") {
  HttpBackendConfig config;
  config.endpoint = "http://127.0.0.1:9";  // discard port, nothing listens
  config.retry.max_attempts = 2;
  config.sleeper = [](int) {};
  auto backend = http_backend(config);
  CHECK_THROWS_AS(backend->generate(simple_ctx(), 8), std::runtime_error);
}

TEST_CASE("recording the http backend enables offline replay") {
  auto cache = std::make_shared<ReplayCache>();
  TokenLosses live;
  {
    FakeModelServer server;
    auto recorder = recording_backend(http_backend(config_for(server)), cache);
    live = recorder->score_continuation(simple_ctx(), "alpha beta gamma");
    CHECK(server.served() == 1);
    // Second identical call is served from the archive, not the wire.
    TokenLosses cached = recorder->score_continuation(simple_ctx(), "alpha beta gamma");
    CHECK(server.served() == 1);
    CHECK(cached.losses == live.losses);
  }
  // Server gone; replay still answers.
  auto replayer = replay_backend(cache);
  TokenLosses offline = replayer->score_continuation(simple_ctx(), "alpha beta gamma");
  CHECK(offline.losses == live.losses);
}
