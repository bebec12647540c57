#pragma once

#include <array>
#include <cstdint>

#include "dkpabe/bytes.hpp"

namespace dkpabe {

std::array<std::uint8_t, 32> sha256(ByteView data);
std::array<std::uint8_t, 64> sha512(ByteView data);

}  // namespace dkpabe
