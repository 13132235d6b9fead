#include "aswap/zpool.hpp"

#include <algorithm>
#include <cstring>

#include <json.hpp>

namespace aswap {

namespace {

int klass_rank(HotnessLevel level) {
    // cold data is swapped out first
    switch (level) {
        case HotnessLevel::Cold: return 0;
        case HotnessLevel::Warm: return 1;
        case HotnessLevel::Hot: return 2;
    }
    return 0;
}

}  // namespace

CompressedExtent make_extent(uint64_t extent_id,
                             const std::vector<PageRecord>& pages,
                             ChunkSizeClass chunk_class, HotnessLevel klass,
                             uint64_t created_seq) {
    if (pages.empty()) throw SpecError("make_extent: no member pages");
    if (chunk_class.sub_page() && pages.size() != 1) {
        throw SpecError("make_extent: sub-page chunk classes hold exactly one page");
    }
    CompressedExtent e;
    e.extent_id = extent_id;
    e.chunk_class_bytes = chunk_class.bytes();
    e.klass = klass;
    e.created_seq = created_seq;

    std::vector<uint8_t> buffer;
    buffer.reserve(pages.size() * kPageSize);
    uint64_t off = 0;
    for (const auto& p : pages) {
        if (p.payload.size() != kPageSize) {
            throw SpecError("make_extent: member payload must be one page");
        }
        e.members.push_back({p.id, off, kPageSize});
        buffer.insert(buffer.end(), p.payload.begin(), p.payload.end());
        off += kPageSize;
    }
    e.chunks = compress(buffer, chunk_class);
    e.total_compressed_bytes = stored_size(e.chunks);
    return e;
}

Zpool::Zpool(uint64_t capacity_bytes) : capacity_(capacity_bytes) {
    if (capacity_ % kPageSize != 0) {
        throw SpecError("zpool capacity must be a multiple of 4096");
    }
    max_blocks_ = capacity_ / kPageSize;
}

uint64_t Zpool::hole_at(const Block& b, uint64_t need) const {
    uint64_t cursor = 0;
    for (const auto& o : b.occupants) {
        if (o.offset - cursor >= need) return cursor;
        cursor = o.offset + o.length;
    }
    if (kPageSize - cursor >= need) return cursor;
    return UINT64_MAX;
}

std::optional<uint64_t> Zpool::find_free_run(uint32_t count) const {
    uint64_t run_start = 0;
    uint32_t run_len = 0;
    uint64_t prev = UINT64_MAX;
    for (uint64_t s : free_sectors_) {
        if (prev != UINT64_MAX && s == prev + 1) {
            ++run_len;
        } else {
            run_start = s;
            run_len = 1;
        }
        prev = s;
        if (run_len >= count) return run_start;
    }
    return std::nullopt;
}

void Zpool::place(CompressedExtent& e, uint64_t sector, uint64_t offset) {
    uint64_t remaining = e.total_compressed_bytes;
    uint64_t cur_sector = sector;
    uint64_t cur_offset = offset;
    uint32_t span = 0;
    while (remaining > 0) {
        Block& b = blocks_[cur_sector];
        free_sectors_.erase(cur_sector);
        uint64_t take = std::min<uint64_t>(remaining, kPageSize - cur_offset);
        b.occupants.push_back({e.extent_id, cur_offset, take});
        std::sort(b.occupants.begin(), b.occupants.end(),
                  [](const Occupant& a, const Occupant& c) { return a.offset < c.offset; });
        b.used += take;
        remaining -= take;
        ++span;
        ++cur_sector;
        cur_offset = 0;
    }
    e.location = CompressedExtent::Location::Zpool;
    e.start_sector = sector;
    e.byte_offset = offset;
    e.sector_span = span;
    layout_.insert({sector, offset, e.extent_id});
    evict_order_.insert({klass_rank(e.klass), e.created_seq, e.extent_id});
}

bool Zpool::can_fit(uint64_t extent_bytes) const {
    if (extent_bytes == 0) return true;
    for (const auto& [sector, b] : blocks_) {
        if (kPageSize - b.used >= extent_bytes &&
            hole_at(b, extent_bytes) != UINT64_MAX) {
            return true;
        }
    }
    uint32_t need = static_cast<uint32_t>((extent_bytes + kPageSize - 1) / kPageSize);
    if (blocks_.size() + need > max_blocks_) return false;
    if (find_free_run(need)) return true;
    return max_blocks_ - frontier_ >= need;
}

void Zpool::put(CompressedExtent& e) {
    if (e.location != CompressedExtent::Location::InFlight) {
        throw SpecError("put: extent must be in flight");
    }
    if (extents_.count(e.extent_id)) {
        throw SpecError("put: duplicate extent id");
    }
    uint64_t need = e.total_compressed_bytes;

    // First fit into a hole of a live block.
    for (auto& [sector, b] : blocks_) {
        if (kPageSize - b.used < need) continue;
        uint64_t off = hole_at(b, need);
        if (off == UINT64_MAX) continue;
        place(e, sector, off);
        extents_.emplace(e.extent_id, e);
        return;
    }

    // Fresh consecutive sectors: reuse a freed run, else extend the frontier.
    uint32_t count = static_cast<uint32_t>((need + kPageSize - 1) / kPageSize);
    if (blocks_.size() + count <= max_blocks_) {
        if (auto run = find_free_run(count)) {
            place(e, *run, 0);
            extents_.emplace(e.extent_id, e);
            return;
        }
        if (max_blocks_ - frontier_ >= count) {
            uint64_t start = frontier_;
            frontier_ += count;
            place(e, start, 0);
            extents_.emplace(e.extent_id, e);
            return;
        }
    }

    uint64_t in_block_free = 0;
    for (const auto& [sector, b] : blocks_) in_block_free += kPageSize - b.used;
    uint64_t available = (max_blocks_ - blocks_.size()) * kPageSize + in_block_free;
    // When fragmentation alone blocks the placement, report the whole need.
    uint64_t shortfall = need > available ? need - available : need;
    throw CapacityError("zpool full: " + std::to_string(need) + " bytes do not fit",
                        shortfall);
}

CompressedExtent Zpool::remove(uint64_t extent_id) {
    auto it = extents_.find(extent_id);
    if (it == extents_.end()) {
        throw LookupError("zpool: unknown extent " + std::to_string(extent_id));
    }
    CompressedExtent e = std::move(it->second);
    extents_.erase(it);

    for (uint64_t s = e.start_sector; s < e.start_sector + e.sector_span; ++s) {
        Block& b = blocks_.at(s);
        auto oit = std::remove_if(b.occupants.begin(), b.occupants.end(),
                                  [&](const Occupant& o) { return o.extent_id == extent_id; });
        for (auto p = oit; p != b.occupants.end(); ++p) b.used -= p->length;
        b.occupants.erase(oit, b.occupants.end());
        if (b.occupants.empty()) {
            blocks_.erase(s);
            free_sectors_.insert(s);
        }
    }
    layout_.erase({e.start_sector, e.byte_offset, extent_id});
    evict_order_.erase({klass_rank(e.klass), e.created_seq, extent_id});
    e.location = CompressedExtent::Location::InFlight;
    return e;
}

ExtractResult Zpool::extract(uint64_t extent_id, const std::vector<PageId>& wanted) {
    CompressedExtent e = remove(extent_id);

    // Whole-extent decode, even when only part of it is wanted.
    std::vector<uint8_t> original = decompress(e.chunks);
    ExtractResult result;
    result.decompressed_original_bytes = original.size();
    result.decompress_ops = static_cast<uint32_t>(e.chunks.size());

    auto is_wanted = [&](PageId id) {
        return std::find(wanted.begin(), wanted.end(), id) != wanted.end();
    };

    std::vector<PageRecord> keep;
    for (const auto& m : e.members) {
        PagePayload payload(original.begin() + m.offset,
                            original.begin() + m.offset + m.length);
        if (is_wanted(m.id)) {
            result.pages.push_back({m.id, std::move(payload)});
        } else {
            keep.push_back({m.id, std::move(payload)});
            result.wasted_decompressed_bytes += m.length;
        }
    }

    if (!keep.empty()) {
        // Merge-back: re-compress the unused pages at the original class and
        // re-put them. Re-compression can lose cross-page matches and end up
        // larger than the freed footprint; in that case the remainder is
        // handed back for the caller to place after making room.
        CompressedExtent rem = make_extent(new_extent_id(), keep,
                                           ChunkSizeClass(e.chunk_class_bytes),
                                           e.klass, e.created_seq);
        result.mergeback_original_bytes = rem.original_bytes();
        result.mergeback_ops = static_cast<uint32_t>(rem.chunks.size());
        result.remainder_extent_id = rem.extent_id;
        if (can_fit(rem.total_compressed_bytes)) {
            put(rem);
        } else {
            result.pending_remainder = std::move(rem);
        }
    }
    return result;
}

ZpoolUsage Zpool::usage() const {
    ZpoolUsage u;
    for (const auto& [sector, b] : blocks_) {
        u.used_bytes += b.used;
        ++u.live_blocks;
    }
    u.free_bytes = u.live_blocks * kPageSize - u.used_bytes;
    u.fragmentation =
        u.live_blocks == 0
            ? 0.0
            : 1.0 - static_cast<double>(u.used_bytes) /
                        static_cast<double>(u.live_blocks * kPageSize);
    return u;
}

bool Zpool::contains(uint64_t extent_id) const {
    return extents_.count(extent_id) != 0;
}

const CompressedExtent& Zpool::get(uint64_t extent_id) const {
    auto it = extents_.find(extent_id);
    if (it == extents_.end()) {
        throw LookupError("zpool: unknown extent " + std::to_string(extent_id));
    }
    return it->second;
}

std::optional<uint64_t> Zpool::extent_at_or_after(uint64_t sector, uint64_t offset,
                                                  uint64_t exclude_id) const {
    auto it = layout_.lower_bound({sector, offset, 0});
    while (it != layout_.end()) {
        uint64_t id = std::get<2>(*it);
        if (id != exclude_id) return id;
        ++it;
    }
    return std::nullopt;
}

std::optional<uint64_t> Zpool::writeback_victim() const {
    if (evict_order_.empty()) return std::nullopt;
    return std::get<2>(*evict_order_.begin());
}

std::string Zpool::debug_dump_json() const {
    nlohmann::ordered_json j;
    j["capacity"] = capacity_;
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (const auto& [sector, b] : blocks_) {
        nlohmann::ordered_json jb;
        jb["sector"] = sector;
        jb["used"] = b.used;
        nlohmann::ordered_json occ = nlohmann::ordered_json::array();
        for (const auto& o : b.occupants) {
            occ.push_back({{"extent", o.extent_id}, {"offset", o.offset},
                           {"length", o.length}});
        }
        jb["occupants"] = std::move(occ);
        blocks.push_back(std::move(jb));
    }
    j["blocks"] = std::move(blocks);
    j["free_sectors"] = std::vector<uint64_t>(free_sectors_.begin(), free_sectors_.end());
    return j.dump();
}

void Zpool::check_conservation() const {
    uint64_t extent_bytes = 0;
    for (const auto& [id, e] : extents_) extent_bytes += e.total_compressed_bytes;
    uint64_t occupant_bytes = 0;
    for (const auto& [sector, b] : blocks_) {
        uint64_t used = 0;
        uint64_t cursor = 0;
        for (const auto& o : b.occupants) {
            if (o.offset < cursor) throw ProtocolError("zpool: overlapping occupants");
            cursor = o.offset + o.length;
            used += o.length;
        }
        if (cursor > kPageSize) throw ProtocolError("zpool: occupant past block end");
        if (used != b.used) throw ProtocolError("zpool: block byte accounting broken");
        occupant_bytes += used;
    }
    if (extent_bytes != occupant_bytes) {
        throw ProtocolError("zpool: live extent bytes != occupant bytes");
    }
}

}  // namespace aswap
