#include "aswap/codec.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <mutex>

namespace aswap {

ChunkSizeClass::ChunkSizeClass(uint32_t bytes) : bytes_(bytes) {
    if (!valid(bytes)) {
        throw SpecError("invalid chunk size class: " + std::to_string(bytes));
    }
}

bool ChunkSizeClass::valid(uint32_t bytes) {
    return std::find(kAll.begin(), kAll.end(), bytes) != kAll.end();
}

namespace {

// ---------------------------------------------------------------------------
// Reference codec: greedy LZ77 over the whole chunk (match window = chunk
// size), min match 4, max match 271.
//
// Token layout, repeated until an end token:
//   1 byte:  (literal_code << 4) | match_code
//   if literal_code == 15: extension bytes, each adding up to 255
//   literal bytes
//   offset, LEB128 varint; offset 0 terminates the stream (no match)
//   if match_code == 15: 1 byte e, match length = 16 + e  (19..271)
//   else match length = match_code + 4                    (4..18)
// ---------------------------------------------------------------------------

constexpr uint32_t kMinMatch = 4;
constexpr uint32_t kMaxMatch = 271;
constexpr uint32_t kHashBits = 13;
constexpr uint32_t kHashSize = 1u << kHashBits;

inline uint32_t load32(const uint8_t* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

inline uint32_t hash4(const uint8_t* p) {
    return (load32(p) * 2654435761u) >> (32 - kHashBits);
}

void put_varint(std::vector<uint8_t>& out, uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<uint8_t>(v) | 0x80);
        v >>= 7;
    }
    out.push_back(static_cast<uint8_t>(v));
}

uint64_t get_varint(const uint8_t* in, size_t n, size_t& pos, size_t chunk_index) {
    uint64_t v = 0;
    int shift = 0;
    while (true) {
        if (pos >= n) throw CodecError("truncated varint", chunk_index);
        uint8_t b = in[pos++];
        v |= static_cast<uint64_t>(b & 0x7F) << shift;
        if (!(b & 0x80)) return v;
        shift += 7;
        if (shift > 63) throw CodecError("oversized varint", chunk_index);
    }
}

void emit_token(std::vector<uint8_t>& out, const uint8_t* lit, size_t lit_len,
                uint64_t offset, uint32_t match_len) {
    uint8_t lit_code = lit_len < 15 ? static_cast<uint8_t>(lit_len) : 15;
    uint8_t match_code = 0;
    uint8_t match_ext = 0;
    bool has_ext = false;
    if (offset != 0) {
        if (match_len <= 18) {
            match_code = static_cast<uint8_t>(match_len - kMinMatch);
        } else {
            match_code = 15;
            match_ext = static_cast<uint8_t>(match_len - 16);
            has_ext = true;
        }
    }
    out.push_back(static_cast<uint8_t>((lit_code << 4) | match_code));
    if (lit_code == 15) {
        size_t rem = lit_len - 15;
        while (rem >= 255) {
            out.push_back(255);
            rem -= 255;
        }
        out.push_back(static_cast<uint8_t>(rem));
    }
    out.insert(out.end(), lit, lit + lit_len);
    put_varint(out, offset);
    if (has_ext) out.push_back(match_ext);
}

class ReferenceLzCodec final : public BlockCodec {
public:
    CodecId id() const override { return CodecId::ReferenceLz; }
    uint16_t version() const override { return 1; }

    std::vector<uint8_t> compress_block(std::span<const uint8_t> in) const override {
        const size_t n = in.size();
        std::vector<uint8_t> out;
        out.reserve(n / 2 + 16);
        std::vector<int32_t> table(kHashSize, -1);

        size_t pos = 0;
        size_t lit_start = 0;
        while (pos + kMinMatch <= n) {
            uint32_t h = hash4(in.data() + pos);
            int32_t cand = table[h];
            table[h] = static_cast<int32_t>(pos);
            if (cand >= 0 && load32(in.data() + cand) == load32(in.data() + pos)) {
                uint32_t len = kMinMatch;
                uint32_t limit = static_cast<uint32_t>(
                    std::min<size_t>(kMaxMatch, n - pos));
                while (len < limit && in[cand + len] == in[pos + len]) ++len;
                emit_token(out, in.data() + lit_start, pos - lit_start,
                           pos - static_cast<size_t>(cand), len);
                size_t end = pos + len;
                for (size_t i = pos + 1; i < end && i + kMinMatch <= n; ++i) {
                    table[hash4(in.data() + i)] = static_cast<int32_t>(i);
                }
                pos = end;
                lit_start = pos;
            } else {
                ++pos;
            }
        }
        emit_token(out, in.data() + lit_start, n - lit_start, 0, 0);
        return out;
    }

    std::vector<uint8_t> decompress_block(std::span<const uint8_t> in,
                                          size_t original_length,
                                          size_t chunk_index) const override {
        std::vector<uint8_t> out;
        out.reserve(original_length);
        const uint8_t* p = in.data();
        const size_t n = in.size();
        size_t pos = 0;
        while (true) {
            if (pos >= n) throw CodecError("truncated token stream", chunk_index);
            uint8_t token = p[pos++];
            size_t lit_len = token >> 4;
            if (lit_len == 15) {
                while (true) {
                    if (pos >= n) throw CodecError("truncated literal length", chunk_index);
                    uint8_t b = p[pos++];
                    lit_len += b;
                    if (b != 255) break;
                }
            }
            if (pos + lit_len > n) throw CodecError("literal run past input", chunk_index);
            out.insert(out.end(), p + pos, p + pos + lit_len);
            pos += lit_len;

            uint64_t offset = get_varint(p, n, pos, chunk_index);
            if (offset == 0) break;
            uint32_t match_code = token & 0x0F;
            uint32_t match_len;
            if (match_code == 15) {
                if (pos >= n) throw CodecError("truncated match length", chunk_index);
                match_len = 16 + p[pos++];
            } else {
                match_len = match_code + kMinMatch;
            }
            if (offset > out.size()) throw CodecError("match offset past start", chunk_index);
            size_t from = out.size() - offset;
            for (uint32_t i = 0; i < match_len; ++i) {
                out.push_back(out[from + i]);  // overlapping copies intended
            }
        }
        if (out.size() != original_length) {
            throw CodecError("decoded length mismatch", chunk_index);
        }
        return out;
    }
};

const ReferenceLzCodec g_reference_lz;

struct Registry {
    std::array<const BlockCodec*, 256> slots{};
    Registry() { slots[static_cast<size_t>(CodecId::ReferenceLz)] = &g_reference_lz; }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

const BlockCodec& codec_for(CodecId id) {
    const BlockCodec* c = registry().slots[static_cast<size_t>(id)];
    if (!c) throw SpecError("no codec registered for id " +
                            std::to_string(static_cast<int>(id)));
    return *c;
}

void register_codec(const BlockCodec& codec) {
    registry().slots[static_cast<size_t>(codec.id())] = &codec;
}

std::vector<CompressedChunk> compress(std::span<const uint8_t> input,
                                      ChunkSizeClass chunk, CodecId codec_id) {
    if (input.empty()) throw SpecError("compress: empty input");
    const BlockCodec& codec = codec_for(codec_id);
    const uint32_t chunk_len = chunk.bytes();
    std::vector<CompressedChunk> chunks;
    chunks.reserve((input.size() + chunk_len - 1) / chunk_len);
    for (size_t off = 0; off < input.size(); off += chunk_len) {
        size_t len = std::min<size_t>(chunk_len, input.size() - off);
        CompressedChunk c;
        c.original_offset = off;
        c.original_length = static_cast<uint32_t>(len);
        std::vector<uint8_t> body = codec.compress_block(input.subspan(off, len));
        if (body.empty() || body.size() >= len) {
            c.stored_raw = true;
            c.data.assign(input.begin() + off, input.begin() + off + len);
        } else {
            c.stored_raw = false;
            c.data = std::move(body);
        }
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<uint8_t> decompress_chunk(const CompressedChunk& chunk,
                                      size_t chunk_index) {
    if (chunk.stored_raw) {
        if (chunk.data.size() != chunk.original_length) {
            throw CodecError("stored-raw length mismatch", chunk_index);
        }
        return chunk.data;
    }
    return codec_for(CodecId::ReferenceLz)
        .decompress_block(chunk.data, chunk.original_length, chunk_index);
}

std::vector<uint8_t> decompress(const std::vector<CompressedChunk>& chunks) {
    std::vector<uint8_t> out;
    uint64_t total = 0;
    for (const auto& c : chunks) total += c.original_length;
    out.reserve(total);
    for (size_t i = 0; i < chunks.size(); ++i) {
        std::vector<uint8_t> part = decompress_chunk(chunks[i], i);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

uint64_t stored_size(const std::vector<CompressedChunk>& chunks) {
    uint64_t total = 0;
    for (const auto& c : chunks) total += c.stored_bytes();
    return total;
}

void encode_chunks(const std::vector<CompressedChunk>& chunks,
                   std::vector<uint8_t>& out) {
    auto put_u32 = [&out](uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    };
    for (const auto& c : chunks) {
        out.push_back(c.stored_raw ? static_cast<uint8_t>(CodecId::StoredRaw)
                                   : static_cast<uint8_t>(CodecId::ReferenceLz));
        put_u32(static_cast<uint32_t>(c.data.size()));
        put_u32(c.original_length);
        out.insert(out.end(), c.data.begin(), c.data.end());
    }
}

std::vector<CompressedChunk> decode_chunks(std::span<const uint8_t> in,
                                           size_t* consumed) {
    std::vector<CompressedChunk> chunks;
    size_t pos = 0;
    uint64_t orig_off = 0;
    auto get_u32 = [&](size_t chunk_index) {
        if (pos + 4 > in.size()) throw CodecError("truncated chunk header", chunk_index);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos + i]) << (8 * i);
        pos += 4;
        return v;
    };
    while (pos < in.size()) {
        size_t index = chunks.size();
        uint8_t flag = in[pos++];
        if (flag > 1) throw CodecError("unknown codec id in chunk header", index);
        CompressedChunk c;
        c.stored_raw = (flag == 0);
        uint32_t comp_len = get_u32(index);
        c.original_length = get_u32(index);
        if (pos + comp_len > in.size()) throw CodecError("truncated chunk body", index);
        c.data.assign(in.begin() + pos, in.begin() + pos + comp_len);
        pos += comp_len;
        c.original_offset = orig_off;
        orig_off += c.original_length;
        chunks.push_back(std::move(c));
    }
    if (consumed) *consumed = pos;
    return chunks;
}

CodecSample measure_codec(std::span<const uint8_t> corpus, ChunkSizeClass chunk,
                          uint32_t repetitions) {
    if (repetitions < 1) throw SpecError("measure_codec: repetitions must be >= 1");
    using clock = std::chrono::steady_clock;

    auto median = [](std::vector<uint64_t>& v) {
        std::sort(v.begin(), v.end());
        return v[(v.size() - 1) / 2];
    };

    std::vector<uint64_t> comp_ns, decomp_ns;
    std::vector<CompressedChunk> chunks;
    for (uint32_t r = 0; r < repetitions; ++r) {
        auto t0 = clock::now();
        chunks = compress(corpus, chunk);
        auto t1 = clock::now();
        comp_ns.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    }
    std::vector<uint8_t> out;
    for (uint32_t r = 0; r < repetitions; ++r) {
        auto t0 = clock::now();
        out = decompress(chunks);
        auto t1 = clock::now();
        decomp_ns.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    }
    if (out.size() != corpus.size() ||
        !std::equal(out.begin(), out.end(), corpus.begin())) {
        throw CodecError("measure_codec: round-trip mismatch", 0);
    }
    CodecSample s;
    s.chunk_bytes = chunk.bytes();
    s.compress_ns_total = median(comp_ns);
    s.decompress_ns_total = median(decomp_ns);
    s.compressed_bytes = stored_size(chunks);
    s.chunk_count = chunks.size();
    s.ratio = static_cast<double>(corpus.size()) / static_cast<double>(s.compressed_bytes);
    return s;
}

}  // namespace aswap
