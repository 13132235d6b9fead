#include "aswap/swapdev.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>

#include "aswap/crc32c.hpp"

namespace aswap {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'W', 'D'};
constexpr uint16_t kVersion = 1;

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v));
    b.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
uint16_t read_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t read_u32(const uint8_t* p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    return v;
}
uint64_t read_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<uint8_t> serialize_extent(const CompressedExtent& e) {
    std::vector<uint8_t> out;
    put_u64(out, e.extent_id);
    put_u32(out, e.chunk_class_bytes);
    out.push_back(static_cast<uint8_t>(e.klass));
    put_u64(out, e.created_seq);
    put_u32(out, static_cast<uint32_t>(e.members.size()));
    for (const auto& m : e.members) {
        put_u32(out, m.id.uid);
        put_u64(out, m.id.pfn);
        put_u64(out, m.offset);
        put_u32(out, m.length);
    }
    encode_chunks(e.chunks, out);
    return out;
}

CompressedExtent deserialize_extent(std::span<const uint8_t> bytes) {
    size_t need_head = 8 + 4 + 1 + 8 + 4;
    if (bytes.size() < need_head) throw FormatError("extent record too short");
    CompressedExtent e;
    size_t pos = 0;
    e.extent_id = read_u64(bytes.data() + pos); pos += 8;
    e.chunk_class_bytes = read_u32(bytes.data() + pos); pos += 4;
    uint8_t klass = bytes[pos++];
    if (klass > 2) throw FormatError("extent record: bad hotness class");
    e.klass = static_cast<HotnessLevel>(klass);
    e.created_seq = read_u64(bytes.data() + pos); pos += 8;
    uint32_t member_count = read_u32(bytes.data() + pos); pos += 4;
    if (bytes.size() < pos + static_cast<size_t>(member_count) * 24) {
        throw FormatError("extent record: truncated member table");
    }
    for (uint32_t i = 0; i < member_count; ++i) {
        CompressedExtent::Member m;
        m.id.uid = read_u32(bytes.data() + pos); pos += 4;
        m.id.pfn = read_u64(bytes.data() + pos); pos += 8;
        m.offset = read_u64(bytes.data() + pos); pos += 8;
        m.length = read_u32(bytes.data() + pos); pos += 4;
        e.members.push_back(m);
    }
    e.chunks = decode_chunks(bytes.subspan(pos));
    e.total_compressed_bytes = stored_size(e.chunks);
    e.location = CompressedExtent::Location::InFlight;
    return e;
}

SwapDevice::SwapDevice(uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

SwapDevice::SwapDevice(const std::string& backing_path, uint64_t capacity_bytes)
    : path_(backing_path), file_backed_(true), capacity_(capacity_bytes) {
    if (std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0) {
        file_.open(path_, std::ios::binary | std::ios::in | std::ios::out);
        if (!file_) throw IoError("cannot open swap backing file: " + path_, 0);
        load_log();
        file_.seekp(0, std::ios::end);
    } else {
        file_.open(path_, std::ios::binary | std::ios::in | std::ios::out |
                              std::ios::trunc);
        if (!file_) throw IoError("cannot create swap backing file: " + path_, 0);
        std::vector<uint8_t> header(kMagic, kMagic + 4);
        put_u16(header, kVersion);
        file_.write(reinterpret_cast<const char*>(header.data()),
                    static_cast<std::streamsize>(header.size()));
        file_.flush();
    }
}

SwapDevice::~SwapDevice() {
    if (file_backed_ && file_.is_open()) file_.flush();
}

void SwapDevice::load_log() {
    file_.seekg(0, std::ios::end);
    uint64_t size = static_cast<uint64_t>(file_.tellg());
    file_.seekg(0);
    std::vector<uint8_t> data(size);
    file_.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
    if (!file_) throw IoError("cannot read swap backing file: " + path_, 0);

    if (size < 6 || std::memcmp(data.data(), kMagic, 4) != 0) {
        throw FormatError("bad swap file magic: " + path_);
    }
    if (read_u16(data.data() + 4) != kVersion) {
        throw FormatError("unsupported swap file version");
    }
    size_t pos = 6;
    uint64_t ordinal = 0;
    while (pos < size) {
        if (pos + 12 > size) {
            throw TruncationError("swap log truncated in record header", pos);
        }
        uint64_t slot = read_u64(data.data() + pos);
        uint32_t len = read_u32(data.data() + pos + 8);
        if (pos + 12 + len + 4 > size) {
            throw TruncationError("swap log truncated in record body", pos);
        }
        uint32_t expected = crc32c(data.data() + pos, 12 + len);
        uint32_t stored = read_u32(data.data() + pos + 12 + len);
        if (stored != expected) {
            throw CorruptionError("swap log checksum mismatch", ordinal);
        }
        if (len == 0) {
            auto it = slots_.find(slot);
            if (it != slots_.end()) {
                live_bytes_ -= it->second.compressed_bytes;
                slots_.erase(it);
            }
        } else {
            SlotRecord rec;
            rec.payload.assign(data.begin() + pos + 12, data.begin() + pos + 12 + len);
            CompressedExtent e = deserialize_extent(rec.payload);
            rec.compressed_bytes = e.total_compressed_bytes;
            live_bytes_ += rec.compressed_bytes;
            slots_[slot] = std::move(rec);
        }
        if (slot >= next_slot_) next_slot_ = slot + 1;
        pos += 12 + len + 4;
        ++ordinal;
    }
    stats_.live_slots = slots_.size();
}

void SwapDevice::append_record(uint64_t slot, const std::vector<uint8_t>& payload) {
    if (!file_backed_) return;
    std::vector<uint8_t> rec;
    put_u64(rec, slot);
    put_u32(rec, static_cast<uint32_t>(payload.size()));
    rec.insert(rec.end(), payload.begin(), payload.end());
    put_u32(rec, crc32c(rec.data(), rec.size()));
    file_.write(reinterpret_cast<const char*>(rec.data()),
                static_cast<std::streamsize>(rec.size()));
    if (!file_) throw IoError("swap log write failed", 0);
}

uint64_t SwapDevice::swap_out(CompressedExtent extent) {
    uint64_t len = extent.total_compressed_bytes;
    if (live_bytes_ + len > capacity_) {
        throw CapacityError("swap device full", live_bytes_ + len - capacity_);
    }
    uint64_t slot = next_slot_++;
    SlotRecord rec;
    rec.payload = serialize_extent(extent);
    rec.compressed_bytes = len;
    append_record(slot, rec.payload);
    slots_[slot] = std::move(rec);
    live_bytes_ += len;
    stats_.flash_write_bytes += len;
    ++stats_.swap_out_ops;
    stats_.live_slots = slots_.size();
    return slot;
}

CompressedExtent SwapDevice::swap_in(uint64_t slot) {
    auto it = slots_.find(slot);
    if (it == slots_.end()) {
        throw LookupError("swap_in: stale slot " + std::to_string(slot));
    }
    CompressedExtent e = deserialize_extent(it->second.payload);
    live_bytes_ -= it->second.compressed_bytes;
    stats_.flash_read_bytes += it->second.compressed_bytes;
    ++stats_.swap_in_ops;
    slots_.erase(it);
    stats_.live_slots = slots_.size();
    append_record(slot, {});  // tombstone
    e.location = CompressedExtent::Location::InFlight;
    return e;
}

bool SwapDevice::has_slot(uint64_t slot) const { return slots_.count(slot) != 0; }

SwapDevice::Stats SwapDevice::stats() const { return stats_; }

void SwapDevice::flush() {
    if (file_backed_) {
        file_.flush();
        if (!file_) throw IoError("swap log flush failed", 0);
    }
}

void SwapDevice::compact() {
    if (!file_backed_) return;
    file_.close();
    std::string tmp = path_ + ".compact";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create compaction file: " + tmp, 0);
        std::vector<uint8_t> header(kMagic, kMagic + 4);
        put_u16(header, kVersion);
        out.write(reinterpret_cast<const char*>(header.data()),
                  static_cast<std::streamsize>(header.size()));
        std::vector<uint64_t> order;
        for (const auto& [slot, rec] : slots_) order.push_back(slot);
        std::sort(order.begin(), order.end());
        for (uint64_t slot : order) {
            const auto& payload = slots_.at(slot).payload;
            std::vector<uint8_t> rec;
            put_u64(rec, slot);
            put_u32(rec, static_cast<uint32_t>(payload.size()));
            rec.insert(rec.end(), payload.begin(), payload.end());
            put_u32(rec, crc32c(rec.data(), rec.size()));
            out.write(reinterpret_cast<const char*>(rec.data()),
                      static_cast<std::streamsize>(rec.size()));
        }
        out.flush();
        if (!out) throw IoError("compaction write failed", 0);
    }
    std::filesystem::rename(tmp, path_);
    file_.open(path_, std::ios::binary | std::ios::in | std::ios::out);
    if (!file_) throw IoError("cannot reopen swap file after compaction", 0);
    file_.seekp(0, std::ios::end);
}

}  // namespace aswap
