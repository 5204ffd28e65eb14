#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mulbench {

// FIPS 180-4 SHA-256, incremental. Self-contained so content hashes in
// manifests and replay-cache keys do not depend on external crypto libs.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, std::size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }
  // Finalizes and returns the lowercase hex digest; the object must not be
  // updated afterwards.
  std::string hex_digest();

  static std::string hash_hex(std::string_view data);

 private:
  void process_block(const std::uint8_t* block);
  std::uint32_t state_[8];
  std::uint64_t total_len_;
  std::uint8_t buffer_[64];
  std::size_t buffer_len_;
  bool finalized_;
};

}  // namespace mulbench
