#pragma once

#include <cstdint>
#include <deque>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aswap/audit.hpp"
#include "aswap/hotness.hpp"
#include "aswap/metrics.hpp"
#include "aswap/swapdev.hpp"
#include "aswap/trace.hpp"
#include "aswap/zpool.hpp"

namespace aswap {

enum class Scheme : uint8_t { ZramBaseline = 0, Ariadne = 1 };
enum class Scenario : uint8_t { EHL = 0, AL = 1 };

const char* to_string(Scheme s);
const char* to_string(Scenario s);

struct SchemeConfig {
    Scheme scheme = Scheme::Ariadne;
    Scenario scenario = Scenario::AL;
    uint32_t small_bytes = 1024;   // chunk class for hot victims
    uint32_t medium_bytes = 2048;  // chunk class for warm victims
    uint32_t large_bytes = 16384;  // chunk class for cold victims
    uint64_t main_memory_bytes = 256ull << 20;
    uint64_t zpool_bytes = 96ull << 20;
    uint32_t predecomp_buffer_pages = 4;
    // Reclaim fires when resident bytes exceed the low watermark and runs
    // until resident bytes drop to the high watermark. Zero means derive
    // from main memory (15/16 and 7/8 of capacity).
    uint64_t reclaim_low_watermark_bytes = 0;
    uint64_t reclaim_high_watermark_bytes = 0;
    uint64_t swap_capacity_bytes = UINT64_MAX;

    void validate() const;
    // Table-style configurations: small<=1K, medium in {2K,4K}, large in
    // {16K,32K}. Anything else is allowed for sensitivity sweeps.
    bool paper_faithful_sizes() const;
    std::string sizes_string() const;  // e.g. "1K-2K-16K"
    std::string to_json() const;

    uint64_t effective_low_watermark() const;
    uint64_t effective_high_watermark() const;
};

enum class FaultSource : uint8_t { Resident = 0, PredecompBuffer = 1, Zpool = 2, Swap = 3 };

struct FaultResolution {
    FaultSource source = FaultSource::Resident;
    double charged_ns = 0.0;
};

enum class EngineAction : uint8_t { Touch, Fault, Reclaim, Prefetch, Rotate, Oom };

struct PrefetchOutcome {
    bool issued = false;
    std::optional<PageId> page;
};

// Deterministic single-threaded state machine over a trace: maintains the
// three-tier storage (resident memory, zpool, flash swap), runs reclamation
// with hotness-aware chunk-class selection, resolves demand faults, and
// drives pre-decompression.
class Engine {
public:
    Engine(SchemeConfig config, CostModel cost_model,
           std::string swap_backing_path = "");

    // Events must arrive in seq order. Returns the internal actions taken.
    std::vector<EngineAction> step(const TraceEvent& event);
    void run(const std::vector<TraceEvent>& events);

    const SchemeConfig& config() const { return config_; }
    const Counters& counters() const { return counters_; }
    const std::vector<RelaunchReport>& relaunches() const { return relaunches_; }
    const std::vector<AuditRecord>& audit() const { return audit_; }
    const HotnessState& hotness() const { return hotness_; }
    const Zpool& pool() const { return pool_; }
    const SwapDevice& swap() const { return *swap_; }

    uint64_t resident_pages() const { return resident_.size(); }
    uint64_t resident_bytes() const { return resident_.size() * kPageSize; }
    uint64_t predecomp_pages() const { return buffer_.size(); }
    uint64_t compressed_pages() const { return page_extent_.size(); }

    RunReport report(const std::string& trace_id) const;

    // Joint page-conservation invariant across tiers; throws ProtocolError.
    void check_conservation() const;

private:
    struct BufferEntry {
        PageId id;
        PagePayload payload;
        uint64_t origin_sector = 0;
        uint64_t origin_offset = 0;
    };
    struct Window {
        bool open = false;
        RelaunchReport report;
    };

    void on_touch(const TraceEvent& event, std::vector<EngineAction>& actions);
    FaultResolution handle_fault(PageId id, std::vector<EngineAction>& actions);
    PrefetchOutcome prefetch_next(uint64_t sector, uint64_t offset);
    // Frees at least needed_bytes of resident memory (or reports exhaustion).
    void reclaim(uint64_t needed_bytes, bool on_demand,
                 std::vector<EngineAction>& actions);
    void maybe_background_reclaim(std::vector<EngineAction>& actions);
    void ensure_resident_capacity(std::vector<EngineAction>& actions);

    // Makes room in the zpool by writing the coldest extents to swap.
    // Returns false when the swap device rejects the writeback.
    bool ensure_pool_space(uint64_t bytes);
    void place_extent(CompressedExtent extent);

    void make_resident(PageId id, PagePayload payload);
    void drop_resident(PageId id);

    void charge_window(uint32_t uid, double ns, double decompress_ns,
                       double compress_ns, uint64_t waste);
    Window* open_window(uint32_t uid);

    void log(std::string action, uint32_t uid, uint64_t pfn,
             std::optional<HotnessLevel> level, std::optional<uint64_t> sector,
             uint64_t bytes, double ns);

    ChunkSizeClass class_for(HotnessLevel level) const;

    SchemeConfig config_;
    CostModel cost_;
    HotnessState hotness_;
    Zpool pool_;
    std::unique_ptr<SwapDevice> swap_;

    std::unordered_map<PageId, PagePayload, PageIdHash> resident_;
    std::unordered_map<PageId, uint64_t, PageIdHash> page_extent_;
    std::unordered_map<uint64_t, CompressedExtent::Location> extent_where_;
    std::unordered_map<uint64_t, uint64_t> extent_slot_;  // extent -> swap slot
    std::deque<BufferEntry> buffer_;

    // Baseline victim policy: global LRU over resident pages.
    std::list<PageId> global_lru_;  // most recent first
    std::unordered_map<PageId, std::list<PageId>::iterator, PageIdHash> lru_pos_;

    std::unordered_map<uint32_t, Window> windows_;
    Counters counters_;
    std::vector<RelaunchReport> relaunches_;
    std::vector<AuditRecord> audit_;

    uint64_t last_seq_ = 0;
    bool seen_event_ = false;
    uint64_t current_seq_ = 0;
    uint32_t current_uid_ = 0;
    bool prefetched_this_fault_ = false;
};

}  // namespace aswap
