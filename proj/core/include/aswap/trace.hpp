#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aswap/errors.hpp"
#include "aswap/types.hpp"

namespace aswap {

enum class EventKind : uint8_t {
    Touch = 0,
    LaunchBegin = 1,
    LaunchEnd = 2,
    Foreground = 3,
};

const char* to_string(EventKind kind);

// Sector is an output of the simulated zpool, not a trace input. Imported
// paper-style traces may carry one per touch; it is kept for the locality
// analyzer and ignored by the engine.
inline constexpr uint64_t kNoSector = UINT64_MAX;

struct TraceEvent {
    uint64_t seq = 0;
    EventKind kind = EventKind::Touch;
    uint32_t uid = 0;
    uint64_t pfn = 0;       // Touch
    uint32_t launch = 0;    // LaunchBegin
    bool write = false;     // Touch; recorded but unused by v1 policies
    uint64_t sector = kNoSector;
    std::vector<uint8_t> payload;  // empty or kPageSize bytes, Touch only

    bool operator==(const TraceEvent&) const = default;

    static TraceEvent touch(uint64_t seq, uint32_t uid, uint64_t pfn,
                            std::vector<uint8_t> payload = {}, bool write = false);
    static TraceEvent launch_begin(uint64_t seq, uint32_t uid, uint32_t ordinal);
    static TraceEvent launch_end(uint64_t seq, uint32_t uid);
    static TraceEvent foreground(uint64_t seq, uint32_t uid);

    PageId page() const { return PageId{uid, pfn}; }
};

// Canonical binary format. Header: magic "ASWP", u16 version, u16 flags,
// u64 record count (16 bytes). Records: u8 kind, u64 seq, kind-specific
// fields, u16 payload length (0 or 4096), payload, CRC32C of the record.
// All integers little-endian.
uint64_t write_trace(const std::vector<TraceEvent>& events, std::ostream& sink);
std::vector<TraceEvent> read_trace(std::istream& source);

uint64_t write_trace_file(const std::vector<TraceEvent>& events,
                          const std::string& path);
std::vector<TraceEvent> read_trace_file(const std::string& path);

// JSONL: one event object per line; payload base64-encoded; field names
// seq, kind, uid, pfn, launch, write, payload (plus sector when present).
void export_jsonl(const std::vector<TraceEvent>& events, std::ostream& sink);
std::vector<TraceEvent> import_jsonl(std::istream& source);

// Checks launch-window well-formedness and dense, strictly increasing seq.
// Throws SpecError on violation.
void validate_events(const std::vector<TraceEvent>& events);

// FNV-1a over the canonical serialization; ties reports to their trace.
uint64_t trace_fingerprint(const std::vector<TraceEvent>& events);

// ---------------------------------------------------------------------------
// Synthetic workload generation
// ---------------------------------------------------------------------------

enum class PayloadModel : uint8_t { Random = 0, ZeroRuns = 1, TemplatedRedundant = 2 };

struct GeneratorSpec {
    uint32_t app_count = 4;
    uint32_t pages_per_app = 1024;   // target anonymous footprint per app
    uint32_t relaunch_count = 5;
    double hot_similarity = 0.7;     // |H_k ∩ H_{k+1}| / |H_{k+1}|
    double reuse = 0.98;             // |H_k ∩ (H_{k+1} ∪ W_{k+1})| / |H_k|
    double consecutive2 = 0.8;       // P(next touched pfn is current + 1)
    PayloadModel payload_model = PayloadModel::TemplatedRedundant;
    uint32_t repeat_period = 1024;   // template period for TemplatedRedundant
    uint64_t rng_seed = 1;

    void validate() const;  // throws SpecError, including reuse < similarity

    static GeneratorSpec from_json(const std::string& text);
    std::string to_json() const;
};

// Deterministic: the emitted events are a pure function of the spec.
std::vector<TraceEvent> generate(const GeneratorSpec& spec);

// Raw bytes in the given payload model; used by chunk sweeps, calibration
// and benchmarks.
std::vector<uint8_t> synth_corpus(PayloadModel model, uint32_t repeat_period,
                                  uint64_t seed, size_t bytes);

}  // namespace aswap
