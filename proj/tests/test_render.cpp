#include <doctest.h>

#include "mulbench/audio.hpp"
#include "mulbench/render.hpp"

using namespace mulbench;

namespace {
Problem prob(std::uint64_t a, std::uint64_t b) {
  return Problem::make(std::to_string(a) + "x" + std::to_string(b), Operand(a), Operand(b));
}
}  // namespace

TEST_CASE("render_prompt text forms") {
  Problem p = prob(47, 36);
  CHECK(render_prompt(p, Representation::NumeralText) == "What is 47 × 36?");
  CHECK(render_prompt(p, Representation::WordText) ==
        "What is forty-seven times thirty-six?");
  CHECK(render_prompt(prob(1, 1), Representation::NumeralText) == "What is 1 × 1?");
  CHECK_THROWS(render_prompt(p, Representation::NumeralImage));
  CHECK_THROWS(render_prompt(p, Representation::Audio));
}

TEST_CASE("image text pairs with the word prompt body") {
  Problem p = prob(47, 36);
  CHECK(image_text(p, Representation::NumeralImage) == "47 × 36 = ?");
  std::string body = "forty-seven times thirty-six";
  CHECK(image_text(p, Representation::WordImage) == body + " = ?");
  std::string prompt = render_prompt(p, Representation::WordText);
  CHECK(prompt.find(body) != std::string::npos);
}

TEST_CASE("svg rendering is deterministic and self-contained") {
  Problem p = prob(47, 36);
  StyleConfig style;
  std::string one = render_image(p, Representation::NumeralImage, style);
  std::string two = render_image(p, Representation::NumeralImage, style);
  CHECK(one == two);
  CHECK(one.find("<svg") == 0);
  CHECK(one.find("font") == std::string::npos);  // no font references, only rects
  std::string words = render_image(p, Representation::WordImage, style);
  CHECK(words != one);
}

TEST_CASE("png rendering is deterministic with a valid header") {
  Problem p = prob(47, 36);
  StyleConfig style;
  style.format = ImageFormat::Png;
  std::string png = render_image(p, Representation::NumeralImage, style);
  CHECK(png == render_image(p, Representation::NumeralImage, style));
  REQUIRE(png.size() > 8);
  CHECK(static_cast<unsigned char>(png[0]) == 0x89);
  CHECK(png.compare(1, 3, "PNG") == 0);
  CHECK(png.find("IHDR") != std::string::npos);
  CHECK(png.find("IEND") != std::string::npos);
}

TEST_CASE("fixed canvas too small is rejected with the required size") {
  Problem p = prob(1632178320, 5683473970);
  StyleConfig style;
  style.canvas_width = 40;
  try {
    render_image(p, Representation::NumeralImage, style);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("needs a") != std::string::npos);
    CHECK(msg.find("x") != std::string::npos);
  }
}

TEST_CASE("render_instance hashes its payload") {
  Problem p = prob(47, 36);
  StyleConfig style;
  RenderedInstance inst = render_instance(p, Representation::NumeralText, style);
  CHECK(inst.media_type == "text/plain");
  CHECK(inst.payload_hash.size() == 64);
  RenderedInstance again = render_instance(p, Representation::NumeralText, style);
  CHECK(inst.payload_hash == again.payload_hash);
}

TEST_CASE("wav round-trip") {
  WavData wav;
  wav.sample_rate = 8000;
  for (int i = 0; i < 1000; ++i) wav.samples.push_back(static_cast<std::int16_t>(i * 13 % 2048));
  std::string bytes = wav_encode(wav);
  WavData back = wav_decode(bytes);
  CHECK(back.sample_rate == 8000);
  CHECK(back.samples == wav.samples);
  CHECK_THROWS(wav_decode("not a wav"));
}

namespace {

ClipLibrary tiny_library(const std::vector<std::string>& tokens, std::size_t samples_per_clip) {
  std::map<std::string, WavData> clips;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    WavData wav;
    wav.sample_rate = 16000;
    for (std::size_t i = 0; i < samples_per_clip; ++i)
      wav.samples.push_back(static_cast<std::int16_t>((t + 1) * 100));
    clips[tokens[t]] = wav;
  }
  return ClipLibrary::in_memory(16000, 100, std::move(clips));
}

}  // namespace

TEST_CASE("render_audio concatenates clips with fixed gaps") {
  Problem p = prob(47, 36);
  std::vector<std::string> tokens = audio_tokens(p);
  REQUIRE(tokens.size() == 7);  // what is forty seven times thirty six
  ClipLibrary lib = tiny_library(tokens, 160);
  std::string bytes = render_audio(p, lib);
  CHECK(bytes == render_audio(p, lib));
  WavData wav = wav_decode(bytes);
  // duration = sum of clips + (k-1) * gap
  std::size_t gap = 16000 * 100 / 1000;
  CHECK(wav.samples.size() == tokens.size() * 160 + (tokens.size() - 1) * gap);
}

TEST_CASE("render_audio rejects missing clips listing every absent token") {
  Problem p = prob(47, 36);
  ClipLibrary empty = ClipLibrary::in_memory(16000, 100, {});
  try {
    render_audio(p, empty);
    FAIL("expected MissingClipsError");
  } catch (const MissingClipsError& e) {
    CHECK(e.missing.size() == 7);
    CHECK(std::string(e.what()).find("forty") != std::string::npos);
  }
}
