#include "aswap/trace.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "aswap/crc32c.hpp"

namespace aswap {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'W', 'P'};
constexpr uint16_t kVersion = 1;
constexpr uint16_t kFlagHasSectors = 1u << 0;

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

class ByteReader {
public:
    explicit ByteReader(std::istream& in) : in_(in) {}

    bool read_exact(void* dst, size_t n) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        size_t got = static_cast<size_t>(in_.gcount());
        offset_ += got;
        return got == n;
    }
    uint64_t offset() const { return offset_; }

private:
    std::istream& in_;
    uint64_t offset_ = 0;
};

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}
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

std::string base64_encode(const std::vector<uint8_t>& in) {
    static const char* tbl =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= in.size()) {
        uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out.push_back(tbl[v & 63]);
        i += 3;
    }
    size_t rem = in.size() - i;
    if (rem == 1) {
        uint32_t v = in[i] << 16;
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rem == 2) {
        uint32_t v = (in[i] << 16) | (in[i + 1] << 8);
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<uint8_t> base64_decode(const std::string& in) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<uint8_t> out;
    out.reserve(in.size() / 4 * 3);
    uint32_t acc = 0;
    int bits = 0;
    for (char c : in) {
        if (c == '=') break;
        int v = val(c);
        if (v < 0) throw FormatError("invalid base64 character in payload");
        acc = (acc << 6) | static_cast<uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<uint8_t>(acc >> bits));
        }
    }
    return out;
}

}  // namespace

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Touch: return "touch";
        case EventKind::LaunchBegin: return "launch_begin";
        case EventKind::LaunchEnd: return "launch_end";
        case EventKind::Foreground: return "foreground";
    }
    return "?";
}

TraceEvent TraceEvent::touch(uint64_t seq, uint32_t uid, uint64_t pfn,
                             std::vector<uint8_t> payload, bool write) {
    TraceEvent e;
    e.seq = seq;
    e.kind = EventKind::Touch;
    e.uid = uid;
    e.pfn = pfn;
    e.write = write;
    e.payload = std::move(payload);
    return e;
}
TraceEvent TraceEvent::launch_begin(uint64_t seq, uint32_t uid, uint32_t ordinal) {
    TraceEvent e;
    e.seq = seq;
    e.kind = EventKind::LaunchBegin;
    e.uid = uid;
    e.launch = ordinal;
    return e;
}
TraceEvent TraceEvent::launch_end(uint64_t seq, uint32_t uid) {
    TraceEvent e;
    e.seq = seq;
    e.kind = EventKind::LaunchEnd;
    e.uid = uid;
    return e;
}
TraceEvent TraceEvent::foreground(uint64_t seq, uint32_t uid) {
    TraceEvent e;
    e.seq = seq;
    e.kind = EventKind::Foreground;
    e.uid = uid;
    return e;
}

uint64_t write_trace(const std::vector<TraceEvent>& events, std::ostream& sink) {
    bool has_sectors = false;
    for (const auto& e : events) {
        if (e.kind == EventKind::Touch && e.sector != kNoSector) {
            has_sectors = true;
            break;
        }
    }

    std::vector<uint8_t> header;
    header.insert(header.end(), kMagic, kMagic + 4);
    put_u16(header, kVersion);
    put_u16(header, has_sectors ? kFlagHasSectors : 0);
    put_u64(header, events.size());

    uint64_t written = 0;
    auto emit = [&](const std::vector<uint8_t>& bytes) {
        sink.write(reinterpret_cast<const char*>(bytes.data()),
                   static_cast<std::streamsize>(bytes.size()));
        if (!sink) throw IoError("trace sink write failed", written);
        written += bytes.size();
    };
    emit(header);

    uint64_t prev_seq = 0;
    bool first = true;
    std::vector<uint8_t> rec;
    for (const auto& e : events) {
        if (!first && e.seq <= prev_seq) {
            throw SpecError("write_trace: events not ordered by seq");
        }
        prev_seq = e.seq;
        first = false;

        rec.clear();
        rec.push_back(static_cast<uint8_t>(e.kind));
        put_u64(rec, e.seq);
        switch (e.kind) {
            case EventKind::Touch:
                put_u32(rec, e.uid);
                put_u64(rec, e.pfn);
                rec.push_back(e.write ? 1 : 0);
                if (has_sectors) put_u64(rec, e.sector);
                break;
            case EventKind::LaunchBegin:
                put_u32(rec, e.uid);
                put_u32(rec, e.launch);
                break;
            case EventKind::LaunchEnd:
            case EventKind::Foreground:
                put_u32(rec, e.uid);
                break;
        }
        if (e.kind == EventKind::Touch) {
            if (!e.payload.empty() && e.payload.size() != kPageSize) {
                throw SpecError("touch payload must be empty or one page");
            }
            put_u16(rec, static_cast<uint16_t>(e.payload.size()));
            rec.insert(rec.end(), e.payload.begin(), e.payload.end());
        } else {
            put_u16(rec, 0);
        }
        put_u32(rec, crc32c(rec.data(), rec.size()));
        emit(rec);
    }
    sink.flush();
    if (!sink) throw IoError("trace sink flush failed", written);
    return written;
}

std::vector<TraceEvent> read_trace(std::istream& source) {
    ByteReader in(source);
    uint8_t header[16];
    if (!in.read_exact(header, sizeof header)) {
        throw FormatError("trace shorter than header");
    }
    if (std::memcmp(header, kMagic, 4) != 0) {
        throw FormatError("bad trace magic");
    }
    uint16_t version = read_u16(header + 4);
    if (version != kVersion) {
        throw FormatError("unsupported trace version " + std::to_string(version));
    }
    uint16_t flags = read_u16(header + 6);
    bool has_sectors = flags & kFlagHasSectors;
    uint64_t count = read_u64(header + 8);

    std::vector<TraceEvent> events;
    events.reserve(count);
    std::vector<uint8_t> rec;
    uint64_t prev_seq = 0;
    for (uint64_t ordinal = 0; ordinal < count; ++ordinal) {
        auto truncated = [&]() -> TruncationError {
            return TruncationError(
                "trace truncated in record " + std::to_string(ordinal), in.offset());
        };
        uint8_t fixed[9];
        if (!in.read_exact(fixed, sizeof fixed)) throw truncated();
        rec.assign(fixed, fixed + sizeof fixed);

        TraceEvent e;
        if (fixed[0] > static_cast<uint8_t>(EventKind::Foreground)) {
            throw FormatError("unknown event kind in record " + std::to_string(ordinal));
        }
        e.kind = static_cast<EventKind>(fixed[0]);
        e.seq = read_u64(fixed + 1);

        auto read_more = [&](size_t n) {
            size_t base = rec.size();
            rec.resize(base + n);
            if (!in.read_exact(rec.data() + base, n)) throw truncated();
            return rec.data() + base;
        };

        switch (e.kind) {
            case EventKind::Touch: {
                const uint8_t* p = read_more(has_sectors ? 21 : 13);
                e.uid = read_u32(p);
                e.pfn = read_u64(p + 4);
                e.write = p[12] != 0;
                if (has_sectors) e.sector = read_u64(p + 13);
                break;
            }
            case EventKind::LaunchBegin: {
                const uint8_t* p = read_more(8);
                e.uid = read_u32(p);
                e.launch = read_u32(p + 4);
                break;
            }
            case EventKind::LaunchEnd:
            case EventKind::Foreground: {
                const uint8_t* p = read_more(4);
                e.uid = read_u32(p);
                break;
            }
        }
        {
            const uint8_t* p = read_more(2);
            uint16_t paylen = read_u16(p);
            if (paylen != 0 && paylen != kPageSize) {
                throw FormatError("record " + std::to_string(ordinal) +
                                  ": payload length must be 0 or 4096");
            }
            if (paylen) {
                const uint8_t* q = read_more(paylen);
                e.payload.assign(q, q + paylen);
            }
        }
        uint32_t expected = crc32c(rec.data(), rec.size());
        uint8_t crc_bytes[4];
        if (!in.read_exact(crc_bytes, 4)) throw truncated();
        if (read_u32(crc_bytes) != expected) {
            throw CorruptionError("checksum mismatch in record " + std::to_string(ordinal),
                                  ordinal);
        }
        if (ordinal > 0 && e.seq <= prev_seq) {
            throw FormatError("record " + std::to_string(ordinal) +
                              ": seq not strictly increasing");
        }
        prev_seq = e.seq;
        events.push_back(std::move(e));
    }
    return events;
}

uint64_t write_trace_file(const std::vector<TraceEvent>& events,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open trace file for writing: " + path, 0);
    return write_trace(events, out);
}

std::vector<TraceEvent> read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace file: " + path, 0);
    return read_trace(in);
}

void export_jsonl(const std::vector<TraceEvent>& events, std::ostream& sink) {
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["seq"] = e.seq;
        j["kind"] = to_string(e.kind);
        j["uid"] = e.uid;
        j["pfn"] = e.pfn;
        j["launch"] = e.launch;
        j["write"] = e.write;
        j["payload"] = base64_encode(e.payload);
        if (e.sector != kNoSector) j["sector"] = e.sector;
        sink << j.dump() << '\n';
    }
    sink.flush();
}

std::vector<TraceEvent> import_jsonl(std::istream& source) {
    std::vector<TraceEvent> events;
    std::string line;
    uint64_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw FormatError("jsonl line " + std::to_string(lineno) + ": " + ex.what());
        }
        TraceEvent e;
        e.seq = j.at("seq").get<uint64_t>();
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "touch") e.kind = EventKind::Touch;
        else if (kind == "launch_begin") e.kind = EventKind::LaunchBegin;
        else if (kind == "launch_end") e.kind = EventKind::LaunchEnd;
        else if (kind == "foreground") e.kind = EventKind::Foreground;
        else throw FormatError("jsonl line " + std::to_string(lineno) +
                               ": unknown kind '" + kind + "'");
        e.uid = j.at("uid").get<uint32_t>();
        if (j.contains("pfn")) e.pfn = j["pfn"].get<uint64_t>();
        if (j.contains("launch")) e.launch = j["launch"].get<uint32_t>();
        if (j.contains("write")) e.write = j["write"].get<bool>();
        if (j.contains("sector")) e.sector = j["sector"].get<uint64_t>();
        if (j.contains("payload")) {
            e.payload = base64_decode(j["payload"].get<std::string>());
            if (!e.payload.empty() && e.payload.size() != kPageSize) {
                throw FormatError("jsonl line " + std::to_string(lineno) +
                                  ": payload must decode to 0 or 4096 bytes");
            }
        }
        events.push_back(std::move(e));
    }
    return events;
}

void validate_events(const std::vector<TraceEvent>& events) {
    uint64_t prev_seq = 0;
    bool first = true;
    std::unordered_map<uint32_t, int64_t> open_ordinal;   // uid -> ordinal or -1
    std::unordered_map<uint32_t, int64_t> last_ordinal;   // uid -> last begun
    for (const auto& e : events) {
        if (!first && e.seq != prev_seq + 1) {
            throw SpecError("seq values must be dense; gap before seq " +
                            std::to_string(e.seq));
        }
        prev_seq = e.seq;
        first = false;
        switch (e.kind) {
            case EventKind::LaunchBegin: {
                auto it = open_ordinal.find(e.uid);
                if (it != open_ordinal.end() && it->second >= 0) {
                    throw SpecError("LaunchBegin while a window is open, uid " +
                                    std::to_string(e.uid));
                }
                auto last = last_ordinal.find(e.uid);
                int64_t expect = last == last_ordinal.end() ? 0 : last->second + 1;
                if (e.launch != expect) {
                    throw SpecError("launch ordinals must be consecutive, uid " +
                                    std::to_string(e.uid));
                }
                open_ordinal[e.uid] = e.launch;
                last_ordinal[e.uid] = e.launch;
                break;
            }
            case EventKind::LaunchEnd: {
                auto it = open_ordinal.find(e.uid);
                if (it == open_ordinal.end() || it->second < 0) {
                    throw SpecError("LaunchEnd without open window, uid " +
                                    std::to_string(e.uid));
                }
                it->second = -1;
                break;
            }
            default:
                break;
        }
    }
    for (const auto& [uid, ord] : open_ordinal) {
        if (ord >= 0) {
            throw SpecError("trace ends with open window, uid " + std::to_string(uid));
        }
    }
}

uint64_t trace_fingerprint(const std::vector<TraceEvent>& events) {
    std::ostringstream buf(std::ios::binary);
    write_trace(events, buf);
    std::string bytes = buf.str();
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ull;
    return h;
}

GeneratorSpec GeneratorSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError(std::string("generator spec: ") + ex.what());
    }
    GeneratorSpec s;
    if (j.contains("app_count")) s.app_count = j["app_count"].get<uint32_t>();
    if (j.contains("pages_per_app")) s.pages_per_app = j["pages_per_app"].get<uint32_t>();
    if (j.contains("relaunch_count")) s.relaunch_count = j["relaunch_count"].get<uint32_t>();
    if (j.contains("hot_similarity")) s.hot_similarity = j["hot_similarity"].get<double>();
    if (j.contains("reuse")) s.reuse = j["reuse"].get<double>();
    if (j.contains("consecutive2")) s.consecutive2 = j["consecutive2"].get<double>();
    if (j.contains("repeat_period")) s.repeat_period = j["repeat_period"].get<uint32_t>();
    if (j.contains("rng_seed")) s.rng_seed = j["rng_seed"].get<uint64_t>();
    if (j.contains("payload_model")) {
        std::string m = j["payload_model"].get<std::string>();
        if (m == "random") s.payload_model = PayloadModel::Random;
        else if (m == "zero_runs") s.payload_model = PayloadModel::ZeroRuns;
        else if (m == "templated_redundant") s.payload_model = PayloadModel::TemplatedRedundant;
        else throw SpecError("unknown payload model '" + m + "'");
    }
    s.validate();
    return s;
}

std::string GeneratorSpec::to_json() const {
    nlohmann::ordered_json j;
    j["app_count"] = app_count;
    j["pages_per_app"] = pages_per_app;
    j["relaunch_count"] = relaunch_count;
    j["hot_similarity"] = hot_similarity;
    j["reuse"] = reuse;
    j["consecutive2"] = consecutive2;
    switch (payload_model) {
        case PayloadModel::Random: j["payload_model"] = "random"; break;
        case PayloadModel::ZeroRuns: j["payload_model"] = "zero_runs"; break;
        case PayloadModel::TemplatedRedundant:
            j["payload_model"] = "templated_redundant";
            break;
    }
    j["repeat_period"] = repeat_period;
    j["rng_seed"] = rng_seed;
    return j.dump(2);
}

}  // namespace aswap
