#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace aswap {

inline constexpr uint32_t kPageSize = 4096;

// (uid, pfn) names one anonymous page for the whole run. The identity is
// stable across compress/decompress cycles; only the tier changes.
struct PageId {
    uint32_t uid = 0;
    uint64_t pfn = 0;
    auto operator<=>(const PageId&) const = default;
};

struct PageIdHash {
    size_t operator()(const PageId& id) const noexcept {
        uint64_t h = 0xcbf29ce484222325ull;
        h = (h ^ id.uid) * 0x100000001b3ull;
        h = (h ^ id.pfn) * 0x100000001b3ull;
        h = (h ^ (id.pfn >> 32)) * 0x100000001b3ull;
        return static_cast<size_t>(h);
    }
};

using PagePayload = std::vector<uint8_t>;  // always kPageSize bytes once registered

struct PageRecord {
    PageId id;
    PagePayload payload;
};

enum class HotnessLevel : uint8_t { Hot = 0, Warm = 1, Cold = 2 };

inline const char* to_string(HotnessLevel level) {
    switch (level) {
        case HotnessLevel::Hot: return "hot";
        case HotnessLevel::Warm: return "warm";
        case HotnessLevel::Cold: return "cold";
    }
    return "?";
}

}  // namespace aswap
