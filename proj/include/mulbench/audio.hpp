#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mulbench/operand.hpp"

namespace mulbench {

// 16-bit PCM mono audio.
struct WavData {
  std::uint32_t sample_rate = 16000;
  std::vector<std::int16_t> samples;
};

std::string wav_encode(const WavData& wav);
WavData wav_decode(const std::string& bytes);

// Directory of per-word WAV clips plus a JSON index:
//   { "sample_rate": 16000, "gap_ms": 120, "clips": { "forty": "forty.wav", ... } }
class ClipLibrary {
 public:
  static ClipLibrary load(const std::string& dir);
  static ClipLibrary in_memory(std::uint32_t sample_rate, int gap_ms,
                               std::map<std::string, WavData> clips);

  bool has(const std::string& token) const { return clips_.count(token) > 0; }
  const WavData& clip(const std::string& token) const { return clips_.at(token); }
  std::uint32_t sample_rate() const { return sample_rate_; }
  int gap_ms() const { return gap_ms_; }
  std::size_t size() const { return clips_.size(); }

 private:
  std::uint32_t sample_rate_ = 16000;
  int gap_ms_ = 120;
  std::map<std::string, WavData> clips_;
};

struct MissingClipsError : std::runtime_error {
  explicit MissingClipsError(std::vector<std::string> tokens);
  std::vector<std::string> missing;
};

// Concatenates per-word clips for the word-form utterance of the problem with
// fixed inter-word silence. The utterance is the word_text prompt.
std::string render_audio(const Problem& p, const ClipLibrary& clips);

// Tokens the clip library must provide for a problem.
std::vector<std::string> audio_tokens(const Problem& p);

}  // namespace mulbench
