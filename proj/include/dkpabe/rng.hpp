#pragma once

#include <cstdint>
#include <span>

#include "dkpabe/bytes.hpp"

namespace dkpabe {

// Source of uniformly random bytes. Implementations need not be thread-safe.
class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }
  std::uint64_t next_u64();
};

// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Reproducible stream: SHA-512(seed || counter) blocks. Test and benchmark use only.
class DeterministicRng final : public Rng {
 public:
  explicit DeterministicRng(std::uint64_t seed);
  explicit DeterministicRng(ByteView seed);

  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  Bytes seed_;
  std::uint64_t counter_ = 0;
  std::uint8_t block_[64] = {};
  std::size_t used_ = 64;
};

}  // namespace dkpabe
