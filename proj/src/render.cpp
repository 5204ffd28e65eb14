#include "mulbench/render.hpp"

#include <array>
#include <cstring>
#include <map>
#include <stdexcept>

#include "mulbench/sha256.hpp"
#include "mulbench/words.hpp"

namespace mulbench {

const char* representation_name(Representation r) {
  switch (r) {
    case Representation::NumeralText: return "numeral_text";
    case Representation::WordText: return "word_text";
    case Representation::NumeralImage: return "numeral_image";
    case Representation::WordImage: return "word_image";
    case Representation::Audio: return "audio";
  }
  return "?";
}

std::optional<Representation> representation_from_name(std::string_view name) {
  if (name == "numeral_text") return Representation::NumeralText;
  if (name == "word_text") return Representation::WordText;
  if (name == "numeral_image") return Representation::NumeralImage;
  if (name == "word_image") return Representation::WordImage;
  if (name == "audio") return Representation::Audio;
  return std::nullopt;
}

bool is_text_representation(Representation r) {
  return r == Representation::NumeralText || r == Representation::WordText;
}

bool is_image_representation(Representation r) {
  return r == Representation::NumeralImage || r == Representation::WordImage;
}

std::string render_prompt(const Problem& p, Representation r) {
  if (r == Representation::NumeralText)
    return "What is " + p.a.to_string() + " × " + p.b.to_string() + "?";
  if (r == Representation::WordText)
    return "What is " + to_words(p.a.value()) + " times " + to_words(p.b.value()) + "?";
  throw std::invalid_argument(std::string("render_prompt: ") + representation_name(r) +
                              " is not a text representation");
}

std::string image_text(const Problem& p, Representation r) {
  if (r == Representation::NumeralImage)
    return p.a.to_string() + " × " + p.b.to_string() + " = ?";
  if (r == Representation::WordImage)
    return to_words(p.a.value()) + " times " + to_words(p.b.value()) + " = ?";
  throw std::invalid_argument(std::string("image_text: ") + representation_name(r) +
                              " is not an image representation");
}

// ---- embedded 5x7 glyph set ----

namespace {

struct Glyph {
  std::uint8_t rows[7];  // bit 4 = leftmost column
};

const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> table = [] {
    std::map<char, Glyph> t;
    auto def = [&](char c, const char* r0, const char* r1, const char* r2, const char* r3,
                   const char* r4, const char* r5, const char* r6) {
      const char* rows[7] = {r0, r1, r2, r3, r4, r5, r6};
      Glyph g{};
      for (int i = 0; i < 7; ++i) {
        std::uint8_t bits = 0;
        for (int j = 0; j < 5; ++j)
          if (rows[i][j] == '#') bits |= static_cast<std::uint8_t>(1u << (4 - j));
        g.rows[i] = bits;
      }
      t[c] = g;
    };
    def('0', ".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###.");
    def('1', "..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###.");
    def('2', ".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####");
    def('3', ".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###.");
    def('4', "...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#.");
    def('5', "#####", "#....", "####.", "....#", "....#", "#...#", ".###.");
    def('6', "..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###.");
    def('7', "#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#...");
    def('8', ".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###.");
    def('9', ".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##..");
    def('a', ".....", ".....", ".###.", "....#", ".####", "#...#", ".####");
    def('b', "#....", "#....", "####.", "#...#", "#...#", "#...#", "####.");
    def('c', ".....", ".....", ".####", "#....", "#....", "#....", ".####");
    def('d', "....#", "....#", ".####", "#...#", "#...#", "#...#", ".####");
    def('e', ".....", ".....", ".###.", "#...#", "#####", "#....", ".###.");
    def('f', "..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#...");
    def('g', ".....", ".####", "#...#", "#...#", ".####", "....#", ".###.");
    def('h', "#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#");
    def('i', "..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###.");
    def('j', "...#.", ".....", "..##.", "...#.", "...#.", "#..#.", ".##..");
    def('k', "#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#.");
    def('l', ".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.");
    def('m', ".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#");
    def('n', ".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#");
    def('o', ".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###.");
    def('p', ".....", "####.", "#...#", "#...#", "####.", "#....", "#....");
    def('q', ".....", ".####", "#...#", "#...#", ".####", "....#", "....#");
    def('r', ".....", ".....", "#.##.", "##..#", "#....", "#....", "#....");
    def('s', ".....", ".....", ".####", "#....", ".###.", "....#", "####.");
    def('t', ".#...", ".#...", "###..", ".#...", ".#...", ".#..#", "..##.");
    def('u', ".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#");
    def('v', ".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#..");
    def('w', ".....", ".....", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#.");
    def('x', ".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#");
    def('y', ".....", "#...#", "#...#", "#...#", ".####", "....#", ".###.");
    def('z', ".....", ".....", "#####", "...#.", "..#..", ".#...", "#####");
    def('W', "#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#");
    def('=', ".....", ".....", "#####", ".....", "#####", ".....", ".....");
    def('?', ".###.", "#...#", "....#", "..##.", "..#..", ".....", "..#..");
    def('-', ".....", ".....", ".....", "#####", ".....", ".....", ".....");
    def('.', ".....", ".....", ".....", ".....", ".....", ".##..", ".##..");
    def(',', ".....", ".....", ".....", ".....", ".##..", "..#..", ".#...");
    def(' ', ".....", ".....", ".....", ".....", ".....", ".....", ".....");
    def('\x01', ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", ".....");  // times sign
    return t;
  }();
  return table;
}

// Decodes UTF-8 into glyph keys, mapping U+00D7 to the internal times-sign
// slot. Unknown characters are rejected with a diagnostic.
std::vector<char> glyph_keys(const std::string& text) {
  std::vector<char> keys;
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xC3 && i + 1 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x97) {
      keys.push_back('\x01');
      ++i;
      continue;
    }
    if (c >= 0x80) throw std::invalid_argument("render: unsupported non-ASCII character");
    if (!font().count(static_cast<char>(c)))
      throw std::invalid_argument(std::string("render: no glyph for character '") +
                                  static_cast<char>(c) + "'");
    keys.push_back(static_cast<char>(c));
  }
  return keys;
}

struct Layout {
  int width = 0, height = 0;  // final canvas in pixels
  int origin_x = 0, origin_y = 0;
};

Layout layout_for(const std::string& text, const StyleConfig& style, std::size_t n_glyphs) {
  int text_w = static_cast<int>(n_glyphs) * 6 - 1;  // 5 px glyph + 1 px gap
  int need_w = text_w * style.scale + 2 * style.padding;
  int need_h = 7 * style.scale + 2 * style.padding;
  Layout l;
  l.width = style.canvas_width > 0 ? style.canvas_width : need_w;
  l.height = style.canvas_height > 0 ? style.canvas_height : need_h;
  if (l.width < need_w || l.height < need_h) {
    throw std::invalid_argument("render: text \"" + text + "\" needs a " +
                                std::to_string(need_w) + "x" + std::to_string(need_h) +
                                " canvas but the style fixes " + std::to_string(l.width) + "x" +
                                std::to_string(l.height));
  }
  l.origin_x = style.padding;
  l.origin_y = style.padding;
  return l;
}

}  // namespace

std::string render_text_svg(const std::string& text, const StyleConfig& style) {
  std::vector<char> keys = glyph_keys(text);
  Layout l = layout_for(text, style, keys.size());
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(l.width) +
         "\" height=\"" + std::to_string(l.height) + "\" viewBox=\"0 0 " +
         std::to_string(l.width) + " " + std::to_string(l.height) + "\">\n";
  out += "<rect width=\"" + std::to_string(l.width) + "\" height=\"" +
         std::to_string(l.height) + "\" fill=\"" + style.background + "\"/>\n";
  out += "<g fill=\"" + style.foreground + "\">\n";
  for (std::size_t g = 0; g < keys.size(); ++g) {
    const Glyph& glyph = font().at(keys[g]);
    int gx = l.origin_x + static_cast<int>(g) * 6 * style.scale;
    for (int row = 0; row < 7; ++row) {
      std::uint8_t bits = glyph.rows[row];
      int col = 0;
      while (col < 5) {
        if (bits & (1u << (4 - col))) {
          int run = 0;
          while (col + run < 5 && (bits & (1u << (4 - col - run)))) ++run;
          out += "<rect x=\"" + std::to_string(gx + col * style.scale) + "\" y=\"" +
                 std::to_string(l.origin_y + row * style.scale) + "\" width=\"" +
                 std::to_string(run * style.scale) + "\" height=\"" +
                 std::to_string(style.scale) + "\"/>\n";
          col += run;
        } else {
          ++col;
        }
      }
    }
  }
  out += "</g>\n</svg>\n";
  return out;
}

// ---- PNG (grayscale, stored deflate) ----

namespace {

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t len, std::uint32_t crc = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
      std::uint32_t c = n;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[n] = c;
    }
    return t;
  }();
  crc = crc ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

void push_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v >> 24));
  out.push_back(static_cast<char>(v >> 16));
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v));
}

void push_chunk(std::string& out, const char type[4], const std::string& body) {
  push_u32(out, static_cast<std::uint32_t>(body.size()));
  std::string block(type, 4);
  block += body;
  out += block;
  push_u32(out, crc32_of(reinterpret_cast<const std::uint8_t*>(block.data()), block.size()));
}

std::string zlib_stored(const std::string& raw) {
  std::string out;
  out.push_back('\x78');
  out.push_back('\x01');
  std::size_t pos = 0;
  do {
    std::size_t take = std::min<std::size_t>(raw.size() - pos, 65535);
    bool final = pos + take == raw.size();
    out.push_back(final ? '\x01' : '\x00');
    out.push_back(static_cast<char>(take & 0xFF));
    out.push_back(static_cast<char>(take >> 8));
    out.push_back(static_cast<char>(~take & 0xFF));
    out.push_back(static_cast<char>((~take >> 8) & 0xFF));
    out.append(raw, pos, take);
    pos += take;
  } while (pos < raw.size());
  std::uint32_t s1 = 1, s2 = 0;
  for (unsigned char c : raw) {
    s1 = (s1 + c) % 65521;
    s2 = (s2 + s1) % 65521;
  }
  push_u32(out, (s2 << 16) | s1);
  return out;
}

}  // namespace

std::string png_encode_gray(int width, int height, const std::vector<std::uint8_t>& pixels) {
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw std::invalid_argument("png_encode_gray: pixel buffer does not match dimensions");
  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  push_u32(ihdr, static_cast<std::uint32_t>(width));
  push_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr += '\x08';  // bit depth
  ihdr += '\x00';  // grayscale
  ihdr += '\x00';  // compression
  ihdr += '\x00';  // filter
  ihdr += '\x00';  // no interlace
  push_chunk(out, "IHDR", ihdr);
  std::string raw;
  raw.reserve(static_cast<std::size_t>(height) * (static_cast<std::size_t>(width) + 1));
  for (int y = 0; y < height; ++y) {
    raw += '\x00';  // filter: none
    raw.append(reinterpret_cast<const char*>(pixels.data()) +
                   static_cast<std::size_t>(y) * width,
               static_cast<std::size_t>(width));
  }
  push_chunk(out, "IDAT", zlib_stored(raw));
  push_chunk(out, "IEND", "");
  return out;
}

std::string render_text_png(const std::string& text, const StyleConfig& style) {
  std::vector<char> keys = glyph_keys(text);
  Layout l = layout_for(text, style, keys.size());
  std::vector<std::uint8_t> px(static_cast<std::size_t>(l.width) * l.height, 255);
  for (std::size_t g = 0; g < keys.size(); ++g) {
    const Glyph& glyph = font().at(keys[g]);
    int gx = l.origin_x + static_cast<int>(g) * 6 * style.scale;
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (!(glyph.rows[row] & (1u << (4 - col)))) continue;
        for (int dy = 0; dy < style.scale; ++dy) {
          int y = l.origin_y + row * style.scale + dy;
          for (int dx = 0; dx < style.scale; ++dx) {
            int x = gx + col * style.scale + dx;
            px[static_cast<std::size_t>(y) * l.width + x] = 0;
          }
        }
      }
    }
  }
  return png_encode_gray(l.width, l.height, px);
}

std::string render_image(const Problem& p, Representation r, const StyleConfig& style) {
  if (!is_image_representation(r))
    throw std::invalid_argument(std::string("render_image: ") + representation_name(r) +
                                " is not an image representation");
  std::string text = image_text(p, r);
  return style.format == ImageFormat::Svg ? render_text_svg(text, style)
                                          : render_text_png(text, style);
}

RenderedInstance render_instance(const Problem& p, Representation r, const StyleConfig& style) {
  RenderedInstance out;
  out.problem_id = p.id;
  out.representation = r;
  if (is_text_representation(r)) {
    out.payload = render_prompt(p, r);
    out.media_type = "text/plain";
  } else if (is_image_representation(r)) {
    out.payload = render_image(p, r, style);
    out.media_type = style.format == ImageFormat::Svg ? "image/svg+xml" : "image/png";
  } else {
    throw std::invalid_argument("render_instance: audio requires a clip library");
  }
  out.payload_hash = Sha256::hash_hex(out.payload);
  return out;
}

}  // namespace mulbench
