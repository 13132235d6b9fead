#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aswap/errors.hpp"
#include "aswap/trace.hpp"
#include "aswap/types.hpp"

namespace aswap {

struct TouchOutcome {
    bool inserted = false;       // first-ever touch
    HotnessLevel before = HotnessLevel::Cold;
    HotnessLevel after = HotnessLevel::Cold;
};

struct RotationSummary {
    uint32_t demoted = 0;   // left the hot list
    uint32_t promoted = 0;  // entered the hot list
    uint32_t working_set = 0;
};

// Per-application hot/warm/cold LRU lists plus the cross-application LRU
// order. Single-writer: all mutations happen on the engine's event thread.
class HotnessState {
public:
    HotnessState() = default;

    void set_foreground(uint32_t uid);
    uint32_t foreground() const { return foreground_; }

    // Opens a relaunch window; touches with during_relaunch=true are
    // recorded into its working set until end_window.
    void begin_window(uint32_t uid, uint32_t ordinal);
    bool window_open(uint32_t uid) const;

    TouchOutcome touch(PageId id, bool during_relaunch);

    // Rotates the app's lists: hot pages not touched in the window move to
    // the warm front, the window's working set becomes the hot list, and
    // hot capacity adapts to the observed working-set size.
    RotationSummary end_window(uint32_t uid);

    // Victims in eviction order: level-by-level (cold, warm, then hot unless
    // excluded), background apps in LRU order before the foreground app,
    // least recent page first within each list. Only pages marked evictable
    // (resident) are returned; a short result means exhaustion.
    std::vector<std::pair<PageId, HotnessLevel>> select_victims(
        size_t needed_pages, bool exclude_hot) const;

    // Engine bookkeeping: compressed or buffered pages are not victims.
    void set_evictable(PageId id, bool evictable);

    bool known(PageId id) const;
    HotnessLevel level_of(PageId id) const;
    std::vector<PageId> hot_snapshot(uint32_t uid) const;
    std::vector<uint32_t> app_lru_order() const;  // most recent first

    // JSON snapshot of all lists for golden tests.
    std::string debug_dump_json() const;

    // Disjointness and totality; throws ProtocolError on violation.
    void check_invariants() const;

private:
    struct PageEntry {
        HotnessLevel level;
        std::list<PageId>::iterator pos;
        bool evictable = true;
    };
    struct AppLists {
        std::list<PageId> hot, warm, cold;  // most recently used first
        uint64_t hot_capacity = UINT64_MAX; // first launch profiles the size
        bool window_open = false;
        uint32_t window_ordinal = 0;
        bool first_launch_seen = false;
        std::list<PageId> window;           // working set, most recent first
        std::unordered_map<PageId, std::list<PageId>::iterator, PageIdHash> window_pos;
        std::list<uint32_t>::iterator lru_pos;
    };

    AppLists& app(uint32_t uid);
    std::list<PageId>& list_for(AppLists& a, HotnessLevel level);
    const std::list<PageId>& list_for(const AppLists& a, HotnessLevel level) const;
    void touch_app_lru(uint32_t uid);

    std::unordered_map<uint32_t, AppLists> apps_;
    std::unordered_map<PageId, PageEntry, PageIdHash> pages_;
    std::list<uint32_t> app_lru_;  // most recently accessed app first
    uint32_t foreground_ = 0;
};

// Oracle labels from the trace alone; used by the analysis module, never by
// the policy. hot: touched inside window k. warm: touched after the window
// and before launch k+1, excluding hot. cold: other pages of the app seen
// before window k.
std::unordered_map<PageId, HotnessLevel, PageIdHash> label_ground_truth(
    const std::vector<TraceEvent>& trace, uint32_t uid, uint32_t launch_ordinal);

}  // namespace aswap
