#include "aswap/hotness.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace aswap {

HotnessState::AppLists& HotnessState::app(uint32_t uid) {
    auto it = apps_.find(uid);
    if (it == apps_.end()) {
        it = apps_.emplace(uid, AppLists{}).first;
        app_lru_.push_front(uid);
        it->second.lru_pos = app_lru_.begin();
    }
    return it->second;
}

std::list<PageId>& HotnessState::list_for(AppLists& a, HotnessLevel level) {
    switch (level) {
        case HotnessLevel::Hot: return a.hot;
        case HotnessLevel::Warm: return a.warm;
        case HotnessLevel::Cold: return a.cold;
    }
    return a.cold;
}

const std::list<PageId>& HotnessState::list_for(const AppLists& a,
                                                HotnessLevel level) const {
    switch (level) {
        case HotnessLevel::Hot: return a.hot;
        case HotnessLevel::Warm: return a.warm;
        case HotnessLevel::Cold: return a.cold;
    }
    return a.cold;
}

void HotnessState::touch_app_lru(uint32_t uid) {
    AppLists& a = app(uid);
    app_lru_.erase(a.lru_pos);
    app_lru_.push_front(uid);
    a.lru_pos = app_lru_.begin();
}

void HotnessState::set_foreground(uint32_t uid) {
    app(uid);
    foreground_ = uid;
}

void HotnessState::begin_window(uint32_t uid, uint32_t ordinal) {
    AppLists& a = app(uid);
    if (a.window_open) {
        throw ProtocolError("begin_window: window already open for uid " +
                            std::to_string(uid));
    }
    a.window_open = true;
    a.window_ordinal = ordinal;
    a.window.clear();
    a.window_pos.clear();
}

bool HotnessState::window_open(uint32_t uid) const {
    auto it = apps_.find(uid);
    return it != apps_.end() && it->second.window_open;
}

TouchOutcome HotnessState::touch(PageId id, bool during_relaunch) {
    AppLists& a = app(id.uid);
    if (during_relaunch && !a.window_open) {
        throw ProtocolError("touch: no open window for uid " + std::to_string(id.uid));
    }
    touch_app_lru(id.uid);

    TouchOutcome outcome;
    auto it = pages_.find(id);
    if (it == pages_.end()) {
        outcome.inserted = true;
        HotnessLevel level = HotnessLevel::Cold;
        // Hotness initialization: data used during the very first launch
        // seeds the hot list, up to the profiled capacity.
        if (during_relaunch && a.window_ordinal == 0 &&
            a.hot.size() < a.hot_capacity) {
            level = HotnessLevel::Hot;
        }
        std::list<PageId>& lst = list_for(a, level);
        lst.push_front(id);
        pages_.emplace(id, PageEntry{level, lst.begin(), true});
        outcome.before = outcome.after = level;
    } else {
        PageEntry& e = it->second;
        outcome.before = e.level;
        std::list<PageId>& cur = list_for(a, e.level);
        if (!during_relaunch && e.level == HotnessLevel::Cold) {
            // re-access during execution promotes cold data to warm
            cur.erase(e.pos);
            a.warm.push_front(id);
            e.level = HotnessLevel::Warm;
            e.pos = a.warm.begin();
        } else {
            cur.erase(e.pos);
            cur.push_front(id);
            e.pos = cur.begin();
        }
        outcome.after = e.level;
    }

    if (during_relaunch) {
        auto w = a.window_pos.find(id);
        if (w != a.window_pos.end()) a.window.erase(w->second);
        a.window.push_front(id);
        a.window_pos[id] = a.window.begin();
    }
    return outcome;
}

RotationSummary HotnessState::end_window(uint32_t uid) {
    AppLists& a = app(uid);
    if (!a.window_open) {
        throw ProtocolError("end_window: no open window for uid " + std::to_string(uid));
    }
    RotationSummary summary;
    summary.working_set = static_cast<uint32_t>(a.window.size());

    if (!a.first_launch_seen) {
        // First launch: insertion already placed the first hot_capacity
        // window pages into the hot list; the rest of the window stays where
        // it was inserted.
        a.first_launch_seen = true;
        summary.promoted = static_cast<uint32_t>(a.hot.size());
        summary.demoted = 0;
        a.hot_capacity = a.window.size();
    } else {
        // Old hot data not touched in this relaunch moves to the warm
        // front; everything touched in the window becomes the hot list.
        std::vector<PageId> demoted;
        for (const PageId& id : a.hot) {
            if (!a.window_pos.count(id)) demoted.push_back(id);
        }
        for (auto rit = demoted.rbegin(); rit != demoted.rend(); ++rit) {
            PageEntry& e = pages_.at(*rit);
            a.hot.erase(e.pos);
            a.warm.push_front(*rit);
            e.level = HotnessLevel::Warm;
            e.pos = a.warm.begin();
        }
        summary.demoted = static_cast<uint32_t>(demoted.size());

        for (auto rit = a.window.rbegin(); rit != a.window.rend(); ++rit) {
            PageEntry& e = pages_.at(*rit);
            if (e.level != HotnessLevel::Hot) ++summary.promoted;
            list_for(a, e.level).erase(e.pos);
            a.hot.push_front(*rit);
            e.level = HotnessLevel::Hot;
            e.pos = a.hot.begin();
        }
        a.hot_capacity = a.window.size();
    }

    a.window_open = false;
    a.window.clear();
    a.window_pos.clear();
    return summary;
}

std::vector<std::pair<PageId, HotnessLevel>> HotnessState::select_victims(
    size_t needed_pages, bool exclude_hot) const {
    std::vector<std::pair<PageId, HotnessLevel>> victims;
    if (needed_pages == 0) return victims;

    // Background apps in LRU order (least recently used first), foreground
    // last. Victim level dominates app priority.
    std::vector<uint32_t> order;
    for (auto rit = app_lru_.rbegin(); rit != app_lru_.rend(); ++rit) {
        if (*rit != foreground_) order.push_back(*rit);
    }
    if (apps_.count(foreground_)) order.push_back(foreground_);

    const HotnessLevel levels[] = {HotnessLevel::Cold, HotnessLevel::Warm,
                                   HotnessLevel::Hot};
    for (HotnessLevel level : levels) {
        if (level == HotnessLevel::Hot && exclude_hot) break;
        for (uint32_t uid : order) {
            const AppLists& a = apps_.at(uid);
            const std::list<PageId>& lst = list_for(a, level);
            for (auto rit = lst.rbegin(); rit != lst.rend(); ++rit) {
                if (!pages_.at(*rit).evictable) continue;
                victims.emplace_back(*rit, level);
                if (victims.size() == needed_pages) return victims;
            }
        }
    }
    return victims;
}

void HotnessState::set_evictable(PageId id, bool evictable) {
    auto it = pages_.find(id);
    if (it == pages_.end()) {
        throw LookupError("set_evictable: unknown page");
    }
    it->second.evictable = evictable;
}

bool HotnessState::known(PageId id) const { return pages_.count(id) != 0; }

HotnessLevel HotnessState::level_of(PageId id) const {
    auto it = pages_.find(id);
    if (it == pages_.end()) throw LookupError("level_of: unknown page");
    return it->second.level;
}

std::vector<PageId> HotnessState::hot_snapshot(uint32_t uid) const {
    std::vector<PageId> out;
    auto it = apps_.find(uid);
    if (it == apps_.end()) return out;
    out.assign(it->second.hot.begin(), it->second.hot.end());
    return out;
}

std::vector<uint32_t> HotnessState::app_lru_order() const {
    return {app_lru_.begin(), app_lru_.end()};
}

std::string HotnessState::debug_dump_json() const {
    nlohmann::ordered_json j;
    j["foreground"] = foreground_;
    j["app_lru"] = app_lru_order();
    nlohmann::ordered_json apps = nlohmann::ordered_json::array();
    std::vector<uint32_t> uids;
    for (const auto& [uid, _] : apps_) uids.push_back(uid);
    std::sort(uids.begin(), uids.end());
    for (uint32_t uid : uids) {
        const AppLists& a = apps_.at(uid);
        nlohmann::ordered_json entry;
        entry["uid"] = uid;
        entry["hot_capacity"] = a.hot_capacity == UINT64_MAX ? -1
                               : static_cast<int64_t>(a.hot_capacity);
        auto pfns = [](const std::list<PageId>& lst) {
            std::vector<uint64_t> v;
            for (const PageId& id : lst) v.push_back(id.pfn);
            return v;
        };
        entry["hot"] = pfns(a.hot);
        entry["warm"] = pfns(a.warm);
        entry["cold"] = pfns(a.cold);
        apps.push_back(std::move(entry));
    }
    j["apps"] = std::move(apps);
    return j.dump();
}

void HotnessState::check_invariants() const {
    size_t listed = 0;
    for (const auto& [uid, a] : apps_) {
        for (HotnessLevel level : {HotnessLevel::Hot, HotnessLevel::Warm,
                                   HotnessLevel::Cold}) {
            for (const PageId& id : list_for(a, level)) {
                ++listed;
                auto it = pages_.find(id);
                if (it == pages_.end()) {
                    throw ProtocolError("listed page missing from index");
                }
                if (it->second.level != level || id.uid != uid) {
                    throw ProtocolError("page listed under wrong level or app");
                }
            }
        }
    }
    if (listed != pages_.size()) {
        throw ProtocolError("page count mismatch: lists vs index");
    }
}

std::unordered_map<PageId, HotnessLevel, PageIdHash> label_ground_truth(
    const std::vector<TraceEvent>& trace, uint32_t uid, uint32_t launch_ordinal) {
    size_t begin_idx = trace.size(), end_idx = trace.size(),
           next_begin_idx = trace.size();
    for (size_t i = 0; i < trace.size(); ++i) {
        const TraceEvent& e = trace[i];
        if (e.uid != uid) continue;
        if (e.kind == EventKind::LaunchBegin && e.launch == launch_ordinal) {
            begin_idx = i;
        } else if (e.kind == EventKind::LaunchEnd && begin_idx < trace.size() &&
                   end_idx == trace.size() && i > begin_idx) {
            end_idx = i;
        } else if (e.kind == EventKind::LaunchBegin &&
                   e.launch == launch_ordinal + 1) {
            next_begin_idx = i;
        }
    }
    if (begin_idx == trace.size() || end_idx == trace.size()) {
        throw RangeError("launch window " + std::to_string(launch_ordinal) +
                         " of uid " + std::to_string(uid) + " not in trace");
    }

    std::unordered_map<PageId, HotnessLevel, PageIdHash> labels;
    for (size_t i = begin_idx + 1; i < end_idx; ++i) {
        const TraceEvent& e = trace[i];
        if (e.kind == EventKind::Touch && e.uid == uid) {
            labels[e.page()] = HotnessLevel::Hot;
        }
    }
    for (size_t i = end_idx + 1; i < next_begin_idx; ++i) {
        const TraceEvent& e = trace[i];
        if (e.kind == EventKind::Touch && e.uid == uid &&
            !labels.count(e.page())) {
            labels[e.page()] = HotnessLevel::Warm;
        }
    }
    for (size_t i = 0; i < begin_idx; ++i) {
        const TraceEvent& e = trace[i];
        if (e.kind == EventKind::Touch && e.uid == uid &&
            !labels.count(e.page())) {
            labels[e.page()] = HotnessLevel::Cold;
        }
    }
    return labels;
}

}  // namespace aswap
