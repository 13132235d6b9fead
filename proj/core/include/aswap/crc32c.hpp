#pragma once

#include <cstddef>
#include <cstdint>

namespace aswap {

// CRC-32C (Castagnoli), reflected, init/xorout 0xFFFFFFFF.
uint32_t crc32c(const void* data, size_t len, uint32_t crc = 0);

}  // namespace aswap
