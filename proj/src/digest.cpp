#include "dkpabe/digest.hpp"

#include <openssl/sha.h>

namespace dkpabe {

std::array<std::uint8_t, 32> sha256(ByteView data) {
  std::array<std::uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

std::array<std::uint8_t, 64> sha512(ByteView data) {
  std::array<std::uint8_t, 64> out{};
  SHA512(data.data(), data.size(), out.data());
  return out;
}

}  // namespace dkpabe
