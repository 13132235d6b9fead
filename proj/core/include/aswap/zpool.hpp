#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aswap/codec.hpp"
#include "aswap/errors.hpp"
#include "aswap/types.hpp"

namespace aswap {

// One compression unit as stored: either one page's sub-page chunks or
// several whole pages compressed together.
struct CompressedExtent {
    struct Member {
        PageId id;
        uint64_t offset = 0;  // byte range within the extent's original data
        uint32_t length = kPageSize;
    };

    enum class Location : uint8_t { InFlight = 0, Zpool = 1, Swap = 2 };

    uint64_t extent_id = 0;
    std::vector<Member> members;
    uint32_t chunk_class_bytes = kPageSize;
    HotnessLevel klass = HotnessLevel::Cold;  // hotness at compression time
    uint64_t created_seq = 0;
    std::vector<CompressedChunk> chunks;
    uint64_t total_compressed_bytes = 0;  // chunk data + per-chunk headers

    Location location = Location::InFlight;
    uint64_t start_sector = 0;
    uint64_t byte_offset = 0;   // offset within the first block
    uint32_t sector_span = 0;
    uint64_t swap_slot = 0;

    uint64_t original_bytes() const {
        uint64_t n = 0;
        for (const auto& m : members) n += m.length;
        return n;
    }
};

// Builds an extent from page payloads: members tile [0, n*4096) and the
// concatenated payloads are compressed at the given class.
CompressedExtent make_extent(uint64_t extent_id,
                             const std::vector<PageRecord>& pages,
                             ChunkSizeClass chunk_class, HotnessLevel klass,
                             uint64_t created_seq);

struct ZpoolUsage {
    uint64_t used_bytes = 0;
    uint64_t free_bytes = 0;  // within live blocks
    uint64_t live_blocks = 0;
    double fragmentation = 0.0;  // 1 - used / (live blocks * 4096)
};

struct ExtractResult {
    std::vector<PageRecord> pages;  // the wanted pages, decompressed
    std::optional<uint64_t> remainder_extent_id;
    uint64_t wasted_decompressed_bytes = 0;  // 4096 * |unwanted|
    uint64_t decompressed_original_bytes = 0;
    uint32_t decompress_ops = 0;  // codec invocations for the decode
    uint64_t mergeback_original_bytes = 0;
    uint32_t mergeback_ops = 0;   // codec invocations for the re-compression
    // Set when the re-compressed remainder no longer fits the pool; the
    // caller must make room and put it.
    std::optional<CompressedExtent> pending_remainder;
};

// Compressed-data store in simulated DRAM: packs extents into 4KB blocks
// addressed by sector ordinals. Single-writer.
class Zpool {
public:
    explicit Zpool(uint64_t capacity_bytes);  // must be a multiple of 4096

    uint64_t capacity_bytes() const { return capacity_; }
    uint64_t new_extent_id() { return next_extent_id_++; }

    // Packs the extent first-fit into a hole of a live block, or into fresh
    // consecutive sectors. Throws CapacityError with the shortfall.
    void put(CompressedExtent& extent);
    bool can_fit(uint64_t extent_bytes) const;

    // Removes the extent and returns it (location InFlight). Fully empty
    // blocks return to the free list.
    CompressedExtent remove(uint64_t extent_id);

    // Whole-extent decode: wanted pages come back resident, unwanted pages
    // are re-compressed at the extent's original chunk class and re-put.
    ExtractResult extract(uint64_t extent_id, const std::vector<PageId>& wanted);

    ZpoolUsage usage() const;
    bool contains(uint64_t extent_id) const;
    const CompressedExtent& get(uint64_t extent_id) const;

    // First extent whose (sector, offset) is at or after the given position,
    // excluding exclude_id; feeds the sequential-locality predictor.
    std::optional<uint64_t> extent_at_or_after(uint64_t sector, uint64_t offset,
                                               uint64_t exclude_id) const;

    // Extents in eviction order for writeback: coldest class first, oldest
    // first within a class.
    std::optional<uint64_t> writeback_victim() const;

    std::string debug_dump_json() const;
    void check_conservation() const;  // throws ProtocolError on violation

private:
    struct Occupant {
        uint64_t extent_id;
        uint64_t offset;
        uint64_t length;
    };
    struct Block {
        std::vector<Occupant> occupants;  // sorted by offset
        uint64_t used = 0;
    };

    uint64_t hole_at(const Block& b, uint64_t need) const;  // offset or UINT64_MAX
    void place(CompressedExtent& e, uint64_t sector, uint64_t offset);
    std::optional<uint64_t> find_free_run(uint32_t count) const;

    uint64_t capacity_;
    uint64_t max_blocks_;
    std::map<uint64_t, Block> blocks_;   // live blocks by sector
    std::set<uint64_t> free_sectors_;    // previously allocated, now empty
    uint64_t frontier_ = 0;              // next never-allocated sector
    std::map<uint64_t, CompressedExtent> extents_;
    // (klass rank, created_seq, extent_id) -> extent, for writeback order
    std::set<std::tuple<int, uint64_t, uint64_t>> evict_order_;
    // (sector, offset, extent_id), for the physical-successor query
    std::set<std::tuple<uint64_t, uint64_t, uint64_t>> layout_;
    uint64_t next_extent_id_ = 1;
};

}  // namespace aswap
