#include <doctest.h>

#include <stdexcept>

#include <filesystem>

#include "mulbench/backend.hpp"
#include "mulbench/render.hpp"

using namespace mulbench;

namespace {
Problem prob(std::uint64_t a, std::uint64_t b) {
  return Problem::make(std::to_string(a) + "x" + std::to_string(b), Operand(a), Operand(b));
}

ScoringContext text_ctx(const Problem& p) {
  ScoringContext ctx;
  ctx.system = "You are a careful arithmetic assistant.";
  ctx.prompt = render_prompt(p, Representation::NumeralText);
  return ctx;
}
}  // namespace

TEST_CASE("context digest distinguishes every field") {
  ScoringContext a;
  a.prompt = "What is 2 x 2?";
  ScoringContext b = a;
  CHECK(a.digest() == b.digest());
  b.prompt += " ";
  CHECK(a.digest() != b.digest());
  ScoringContext c = a;
  c.image = "bytes";
  c.image_media_type = "image/svg+xml";
  CHECK(c.digest() != a.digest());
}

TEST_CASE("constant mock: deterministic losses and normalization") {
  MockSpec spec;
  spec.kind = "constant";
  spec.value = 1.5;
  auto backend = mock_backend(spec);
  ScoringContext ctx = text_ctx(prob(47, 36));
  TokenLosses losses = backend->score_continuation(ctx, "one two three");
  REQUIRE(losses.token_count() == 3);
  for (double v : losses.losses) CHECK(v == 1.5);
  CHECK_THROWS_AS(backend->score_continuation(ctx, ""), std::invalid_argument);
}

TEST_CASE("hash mock: deterministic and additive over concatenation") {
  MockSpec spec;
  spec.kind = "hash";
  spec.seed = 42;
  auto backend = mock_backend(spec);
  auto backend2 = mock_backend(spec);
  ScoringContext ctx = text_ctx(prob(47, 36));
  TokenLosses whole = backend->score_continuation(ctx, "alpha beta gamma delta");
  TokenLosses again = backend2->score_continuation(ctx, "alpha beta gamma delta");
  CHECK(whole.losses == again.losses);
  TokenLosses left = backend->score_continuation(ctx, "alpha beta");
  TokenLosses right = backend->score_continuation(ctx, "gamma delta");
  std::vector<double> joined = left.losses;
  joined.insert(joined.end(), right.losses.begin(), right.losses.end());
  CHECK(joined == whole.losses);
  // Context-sensitive: a different problem shifts the losses.
  TokenLosses other = backend->score_continuation(text_ctx(prob(49, 51)), "alpha beta");
  CHECK(other.losses != left.losses);
}

TEST_CASE("keyword mock drives winners") {
  MockSpec spec;
  spec.kind = "keyword";
  spec.keyword_rules = {{"Decomposition", 0.5}};
  spec.keyword_default = 2.0;
  auto backend = mock_backend(spec);
  ScoringContext ctx = text_ctx(prob(47, 36));
  CHECK(backend->score_continuation(ctx, "Decomposition: split a factor").losses[0] == 0.5);
  CHECK(backend->score_continuation(ctx, "Columnar: digits").losses[0] == 2.0);
}

TEST_CASE("table mock replays exact losses") {
  ScoringContext ctx = text_ctx(prob(47, 36));
  MockSpec spec;
  spec.kind = "table";
  spec.table.push_back({ctx.digest(), "the continuation", {0.25, 0.5}});
  auto backend = mock_backend(spec);
  TokenLosses losses = backend->score_continuation(ctx, "the continuation");
  CHECK(losses.losses == std::vector<double>{0.25, 0.5});
  CHECK_THROWS(backend->score_continuation(ctx, "something else"));
  // Specs round-trip through JSON.
  MockSpec back = MockSpec::parse_json(spec.to_json());
  CHECK(back.table.size() == 1);
  CHECK(back.table[0].losses == spec.table[0].losses);
}

TEST_CASE("probe-incapable mock raises a capability error") {
  MockSpec spec;
  spec.kind = "constant";
  spec.score_capable = false;
  auto backend = mock_backend(spec);
  CHECK_FALSE(backend->can_score());
  CHECK_THROWS_AS(backend->score_continuation(text_ctx(prob(2, 2)), "x"),
                  CapabilityError);
}

TEST_CASE("generative mock answers registered problems deterministically") {
  MockSpec spec;
  spec.kind = "generative";
  spec.p = 0.0;  // never fail
  spec.seed = 7;
  auto backend = mock_backend(spec);
  Problem p = prob(47, 36);
  ScoringContext ctx = text_ctx(p);
  backend->register_context(ctx, p);
  GenerationResult r = backend->generate(ctx, 2048);
  CHECK(r.text.find("1692") != std::string::npos);
  CHECK(r.finish_reason == "stop");
  CHECK(backend->generate(ctx, 2048).text == r.text);
  // Budget edge: truncation reports a length finish.
  GenerationResult tiny = backend->generate(ctx, 1);
  CHECK(tiny.finish_reason == "length");
  CHECK(tiny.completion_tokens == 1);
  // With p = 1 every answer is wrong but still deterministic.
  MockSpec bad = spec;
  bad.p = 1.0;
  auto wrong = mock_backend(bad);
  wrong->register_context(ctx, p);
  CHECK(wrong->generate(ctx, 2048).text.find("1692") == std::string::npos);
}

TEST_CASE("replay cache: record, save, load, replay") {
  auto cache = std::make_shared<ReplayCache>();
  MockSpec spec;
  spec.kind = "hash";
  spec.seed = 5;
  auto recorder = recording_backend(mock_backend(spec), cache);
  ScoringContext ctx = text_ctx(prob(49, 51));
  TokenLosses live = recorder->score_continuation(ctx, "round and adjust");
  GenerationResult gen = recorder->generate(ctx, 16);
  CHECK(cache->size() == 2);

  // First response wins: re-recording returns the archived value.
  TokenLosses again = recorder->score_continuation(ctx, "round and adjust");
  CHECK(again.losses == live.losses);
  CHECK(cache->size() == 2);

  std::filesystem::path path =
      std::filesystem::temp_directory_path() / "mulbench_replay_test.jsonl";
  cache->save(path.string());
  auto loaded = ReplayCache::load(path.string());
  auto replayer = replay_backend(loaded);
  CHECK(replayer->score_continuation(ctx, "round and adjust").losses == live.losses);
  CHECK(replayer->generate(ctx, 16).text == gen.text);
  CHECK_THROWS_AS(replayer->score_continuation(ctx, "not recorded"), ReplayMissError);
  std::filesystem::remove(path);
}

TEST_CASE("base64 reference values") {
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(base64_encode("foo") == "Zm9v");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
}

TEST_CASE("canonical requests embed payloads as data urls") {
  ScoringContext ctx;
  ctx.system = "sys";
  ctx.prompt = "What is 2 x 3?";
  ctx.image = "<svg/>";
  ctx.image_media_type = "image/svg+xml";
  std::string req = build_score_request(ctx, "a continuation", "m1");
  CHECK(req.find("data:image/svg+xml;base64,") != std::string::npos);
  CHECK(req.find("continuation_logprobs") != std::string::npos);
  CHECK(req.find("\"temperature\":0.0") != std::string::npos);
  std::string gen = build_generate_request(ctx, 2048, "m1");
  CHECK(gen.find("\"max_tokens\":2048") != std::string::npos);
  CHECK(request_cache_key(req).size() == 64);
}
