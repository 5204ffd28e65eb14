#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mulbench/operand.hpp"

namespace mulbench {

enum class Representation { NumeralText, WordText, NumeralImage, WordImage, Audio };

const char* representation_name(Representation r);
std::optional<Representation> representation_from_name(std::string_view name);
bool is_text_representation(Representation r);
bool is_image_representation(Representation r);

enum class ImageFormat { Svg, Png };

// Rendering is fully self-contained (embedded 5x7 bitmap glyphs, no system
// fonts) so identical inputs produce identical bytes on every platform.
struct StyleConfig {
  int scale = 3;        // pixels per glyph cell
  int padding = 6;      // canvas margin in pixels
  int canvas_width = 0;   // 0 = size to fit
  int canvas_height = 0;  // 0 = size to fit
  std::string background = "#ffffff";
  std::string foreground = "#000000";
  ImageFormat format = ImageFormat::Svg;
};

struct RenderedInstance {
  std::string problem_id;
  Representation representation = Representation::NumeralText;
  std::string payload;     // text, SVG/PNG bytes, or WAV bytes
  std::string media_type;  // text/plain, image/svg+xml, image/png, audio/wav
  std::string payload_hash;  // sha256 of payload
};

// "What is {a} x {b}?" with numerals or number words. Rejects non-text
// representations.
std::string render_prompt(const Problem& p, Representation r);

// The equation text drawn into images: "{a} x {b} = ?" (numerals or words).
std::string image_text(const Problem& p, Representation r);

std::string render_image(const Problem& p, Representation r, const StyleConfig& style);

RenderedInstance render_instance(const Problem& p, Representation r, const StyleConfig& style);

// Low-level deterministic rasterizers, exposed for reuse and tests.
std::string render_text_svg(const std::string& text, const StyleConfig& style);
std::string render_text_png(const std::string& text, const StyleConfig& style);

// 8-bit grayscale PNG encoder (stored-deflate zlib stream; no external libs).
std::string png_encode_gray(int width, int height, const std::vector<std::uint8_t>& pixels);

}  // namespace mulbench
