#include "mulbench/audio.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mulbench/render.hpp"
#include "mulbench/words.hpp"

namespace mulbench {

namespace {

void push_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void push_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}
std::uint32_t read_u32le(const std::string& s, std::size_t pos) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 3])) << 24);
}
std::uint16_t read_u16le(const std::string& s, std::size_t pos) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[pos]) |
                                    (static_cast<unsigned char>(s[pos + 1]) << 8));
}

}  // namespace

std::string wav_encode(const WavData& wav) {
  std::string out;
  std::uint32_t data_bytes = static_cast<std::uint32_t>(wav.samples.size() * 2);
  out += "RIFF";
  push_u32le(out, 36 + data_bytes);
  out += "WAVEfmt ";
  push_u32le(out, 16);          // fmt chunk size
  push_u16le(out, 1);           // PCM
  push_u16le(out, 1);           // mono
  push_u32le(out, wav.sample_rate);
  push_u32le(out, wav.sample_rate * 2);  // byte rate
  push_u16le(out, 2);           // block align
  push_u16le(out, 16);          // bits per sample
  out += "data";
  push_u32le(out, data_bytes);
  for (std::int16_t s : wav.samples) {
    out.push_back(static_cast<char>(s & 0xFF));
    out.push_back(static_cast<char>((s >> 8) & 0xFF));
  }
  return out;
}

WavData wav_decode(const std::string& bytes) {
  if (bytes.size() < 44 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
    throw std::invalid_argument("wav_decode: not a RIFF/WAVE file");
  WavData wav;
  std::size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    std::string id = bytes.substr(pos, 4);
    std::uint32_t len = read_u32le(bytes, pos + 4);
    pos += 8;
    if (pos + len > bytes.size()) throw std::invalid_argument("wav_decode: truncated chunk");
    if (id == "fmt ") {
      if (len < 16) throw std::invalid_argument("wav_decode: short fmt chunk");
      if (read_u16le(bytes, pos) != 1) throw std::invalid_argument("wav_decode: not PCM");
      if (read_u16le(bytes, pos + 2) != 1) throw std::invalid_argument("wav_decode: not mono");
      wav.sample_rate = read_u32le(bytes, pos + 4);
      if (read_u16le(bytes, pos + 14) != 16)
        throw std::invalid_argument("wav_decode: not 16-bit");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw std::invalid_argument("wav_decode: data before fmt");
      wav.samples.resize(len / 2);
      for (std::size_t i = 0; i < wav.samples.size(); ++i) {
        wav.samples[i] = static_cast<std::int16_t>(
            static_cast<unsigned char>(bytes[pos + 2 * i]) |
            (static_cast<unsigned char>(bytes[pos + 2 * i + 1]) << 8));
      }
      return wav;
    }
    pos += len + (len % 2);
  }
  throw std::invalid_argument("wav_decode: no data chunk");
}

ClipLibrary ClipLibrary::load(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path index_path = fs::path(dir) / "index.json";
  std::ifstream in(index_path);
  if (!in) throw std::runtime_error("clip library: cannot open " + index_path.string());
  nlohmann::json index = nlohmann::json::parse(in);
  ClipLibrary lib;
  lib.sample_rate_ = index.value("sample_rate", 16000u);
  lib.gap_ms_ = index.value("gap_ms", 120);
  for (const auto& [token, file] : index.at("clips").items()) {
    fs::path clip_path = fs::path(dir) / file.get<std::string>();
    std::ifstream clip_in(clip_path, std::ios::binary);
    if (!clip_in) throw std::runtime_error("clip library: cannot open " + clip_path.string());
    std::string bytes((std::istreambuf_iterator<char>(clip_in)),
                      std::istreambuf_iterator<char>());
    WavData wav = wav_decode(bytes);
    if (wav.sample_rate != lib.sample_rate_)
      throw std::runtime_error("clip library: " + clip_path.string() +
                               " sample rate differs from the index");
    lib.clips_[token] = std::move(wav);
  }
  return lib;
}

ClipLibrary ClipLibrary::in_memory(std::uint32_t sample_rate, int gap_ms,
                                   std::map<std::string, WavData> clips) {
  ClipLibrary lib;
  lib.sample_rate_ = sample_rate;
  lib.gap_ms_ = gap_ms;
  lib.clips_ = std::move(clips);
  return lib;
}

MissingClipsError::MissingClipsError(std::vector<std::string> tokens)
    : std::runtime_error("clip library is missing tokens: " + [&tokens] {
        std::string list;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          if (i) list += ", ";
          list += tokens[i];
        }
        return list;
      }()),
      missing(std::move(tokens)) {}

std::vector<std::string> audio_tokens(const Problem& p) {
  return word_tokens(render_prompt(p, Representation::WordText));
}

std::string render_audio(const Problem& p, const ClipLibrary& clips) {
  std::vector<std::string> tokens = audio_tokens(p);
  std::vector<std::string> missing;
  for (const auto& t : tokens)
    if (!clips.has(t)) missing.push_back(t);
  if (!missing.empty()) throw MissingClipsError(std::move(missing));

  WavData out;
  out.sample_rate = clips.sample_rate();
  std::size_t gap_samples =
      static_cast<std::size_t>(clips.sample_rate()) * static_cast<std::size_t>(clips.gap_ms()) /
      1000;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.samples.insert(out.samples.end(), gap_samples, 0);
    const WavData& clip = clips.clip(tokens[i]);
    out.samples.insert(out.samples.end(), clip.samples.begin(), clip.samples.end());
  }
  return wav_encode(out);
}

}  // namespace mulbench
