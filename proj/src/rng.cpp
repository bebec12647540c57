#include "dkpabe/rng.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <cstring>

#include "dkpabe/digest.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe {

std::uint64_t Rng::next_u64() {
  std::uint8_t b[8];
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = v << 8 | x;
  return v;
}

void SystemRng::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    fail(ErrorCode::kIo, "RAND_bytes failed");
  }
}

DeterministicRng::DeterministicRng(std::uint64_t seed) {
  ByteWriter w;
  w.str("dkpabe/deterministic-rng/v1");
  w.u64(seed);
  seed_ = std::move(w).take();
}

DeterministicRng::DeterministicRng(ByteView seed) {
  ByteWriter w;
  w.str("dkpabe/deterministic-rng/v1");
  w.blob(seed);
  seed_ = std::move(w).take();
}

void DeterministicRng::refill() {
  ByteWriter w;
  w.raw(seed_);
  w.u64(counter_++);
  auto digest = sha512(w.bytes());
  std::memcpy(block_, digest.data(), sizeof(block_));
  used_ = 0;
}

void DeterministicRng::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == sizeof(block_)) refill();
    std::size_t n = std::min(out.size() - pos, sizeof(block_) - used_);
    std::memcpy(out.data() + pos, block_ + used_, n);
    used_ += n;
    pos += n;
  }
}

}  // namespace dkpabe
