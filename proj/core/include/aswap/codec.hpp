#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "aswap/errors.hpp"
#include "aswap/types.hpp"

namespace aswap {

// Compression chunk size: bytes handed to the codec per invocation.
// Power of two between 128 B and 128 KiB; sizes below one page split a
// page into sub-page chunks, sizes above group whole pages.
class ChunkSizeClass {
public:
    static constexpr std::array<uint32_t, 11> kAll = {
        128, 256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072};

    explicit ChunkSizeClass(uint32_t bytes);

    uint32_t bytes() const { return bytes_; }
    bool sub_page() const { return bytes_ < kPageSize; }
    // Pages grouped into one extent at this class (1 for sub-page classes).
    uint32_t pages_per_extent() const {
        return bytes_ >= kPageSize ? bytes_ / kPageSize : 1;
    }
    static bool valid(uint32_t bytes);

    auto operator<=>(const ChunkSizeClass&) const = default;

private:
    uint32_t bytes_;
};

enum class CodecId : uint8_t { StoredRaw = 0, ReferenceLz = 1 };

// One independently decodable slice of a compression unit.
struct CompressedChunk {
    uint64_t original_offset = 0;  // start of this span within the input
    uint32_t original_length = 0;  // span length; the final chunk may be short
    bool stored_raw = false;       // incompressible fallback
    std::vector<uint8_t> data;     // compressed bytes, or a raw copy

    // Wire header: 1 flag byte (codec id) + u32 compressed length
    // + u32 original length.
    static constexpr uint32_t kHeaderBytes = 9;

    uint64_t stored_bytes() const { return kHeaderBytes + data.size(); }
};

// Pluggable block codec. Implementations must be deterministic: compressed
// bytes are a pure function of (input, codec id, codec version).
class BlockCodec {
public:
    virtual ~BlockCodec() = default;
    virtual CodecId id() const = 0;
    virtual uint16_t version() const = 0;
    // Returns compressed bytes; an empty result means "store raw instead".
    virtual std::vector<uint8_t> compress_block(std::span<const uint8_t> in) const = 0;
    virtual std::vector<uint8_t> decompress_block(std::span<const uint8_t> in,
                                                  size_t original_length,
                                                  size_t chunk_index) const = 0;
};

const BlockCodec& codec_for(CodecId id);
void register_codec(const BlockCodec& codec);

// Splits input into chunk-sized spans and compresses each independently.
// Chunks cover the input exactly, in order. Incompressible chunks fall
// back to stored-raw, so this never fails on valid input.
std::vector<CompressedChunk> compress(std::span<const uint8_t> input,
                                      ChunkSizeClass chunk,
                                      CodecId codec = CodecId::ReferenceLz);

// Inverse of compress. Chunks are independent: any subset decodes without
// the others (see decompress_chunk).
std::vector<uint8_t> decompress(const std::vector<CompressedChunk>& chunks);

std::vector<uint8_t> decompress_chunk(const CompressedChunk& chunk,
                                      size_t chunk_index = 0);

// Total stored footprint including per-chunk headers.
uint64_t stored_size(const std::vector<CompressedChunk>& chunks);

// Chunk stream <-> bytes, little-endian (used by the swap device format).
void encode_chunks(const std::vector<CompressedChunk>& chunks,
                   std::vector<uint8_t>& out);
std::vector<CompressedChunk> decode_chunks(std::span<const uint8_t> in,
                                           size_t* consumed = nullptr);

struct CodecSample {
    uint32_t chunk_bytes = 0;
    uint64_t compress_ns_total = 0;    // median wall time over repetitions
    uint64_t decompress_ns_total = 0;  // median wall time over repetitions
    double ratio = 0.0;                // original bytes / stored bytes
    uint64_t compressed_bytes = 0;
    uint64_t chunk_count = 0;
};

// Times the codec calls only; memory copies around the codec are charged
// separately by the cost model.
CodecSample measure_codec(std::span<const uint8_t> corpus, ChunkSizeClass chunk,
                          uint32_t repetitions);

}  // namespace aswap
