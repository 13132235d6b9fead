#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aswap/errors.hpp"
#include "aswap/zpool.hpp"

namespace aswap {

// Extent <-> bytes for the swap backing file (members, class, chunk stream).
std::vector<uint8_t> serialize_extent(const CompressedExtent& extent);
CompressedExtent deserialize_extent(std::span<const uint8_t> bytes);

// File-backed flash swap space holding compressed extents evicted from the
// zpool. Backing file: magic "ASWD", u16 version, then records
// (u64 slot, u32 length, payload, CRC32C); a zero-length record frees the
// slot. Append-log, so flash writes equal payload bytes; space is reclaimed
// only by compact().
class SwapDevice {
public:
    // In-memory device (no persistence).
    explicit SwapDevice(uint64_t capacity_bytes = UINT64_MAX);
    // File-backed device; rebuilds the slot index from an existing log.
    SwapDevice(const std::string& backing_path, uint64_t capacity_bytes = UINT64_MAX);
    ~SwapDevice();

    SwapDevice(const SwapDevice&) = delete;
    SwapDevice& operator=(const SwapDevice&) = delete;

    uint64_t swap_out(CompressedExtent extent);  // returns the slot
    CompressedExtent swap_in(uint64_t slot);     // frees the slot

    bool has_slot(uint64_t slot) const;
    uint64_t live_bytes() const { return live_bytes_; }  // compressed bytes
    uint64_t capacity_bytes() const { return capacity_; }

    struct Stats {
        uint64_t flash_write_bytes = 0;  // sum of compressed extent lengths
        uint64_t flash_read_bytes = 0;
        uint64_t swap_out_ops = 0;
        uint64_t swap_in_ops = 0;
        uint64_t live_slots = 0;
    };
    Stats stats() const;

    void flush();
    void compact();  // rewrite the log with live records only

private:
    struct SlotRecord {
        std::vector<uint8_t> payload;      // serialized extent
        uint64_t compressed_bytes = 0;     // accounting length
    };

    void append_record(uint64_t slot, const std::vector<uint8_t>& payload);
    void load_log();

    std::string path_;
    bool file_backed_ = false;
    std::fstream file_;
    uint64_t capacity_;
    uint64_t live_bytes_ = 0;
    uint64_t next_slot_ = 0;
    std::unordered_map<uint64_t, SlotRecord> slots_;
    Stats stats_;
};

}  // namespace aswap
