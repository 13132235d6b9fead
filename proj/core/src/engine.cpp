#include "aswap/engine.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace aswap {

const char* to_string(Scheme s) {
    return s == Scheme::ZramBaseline ? "zram" : "ariadne";
}
const char* to_string(Scenario s) { return s == Scenario::EHL ? "ehl" : "al"; }

void SchemeConfig::validate() const {
    for (uint32_t bytes : {small_bytes, medium_bytes, large_bytes}) {
        if (!ChunkSizeClass::valid(bytes)) {
            throw SpecError("chunk size " + std::to_string(bytes) +
                            " is not a valid class");
        }
    }
    if (main_memory_bytes < 4 * kPageSize) {
        throw SpecError("main memory must hold at least 4 pages");
    }
    if (zpool_bytes % kPageSize != 0 || zpool_bytes == 0) {
        throw SpecError("zpool capacity must be a positive multiple of 4096");
    }
    uint64_t low = effective_low_watermark();
    uint64_t high = effective_high_watermark();
    if (high > low || low > main_memory_bytes) {
        throw SpecError("watermarks must satisfy high <= low <= main memory");
    }
}

bool SchemeConfig::paper_faithful_sizes() const {
    return small_bytes <= 1024 && (medium_bytes == 2048 || medium_bytes == 4096) &&
           (large_bytes == 16384 || large_bytes == 32768);
}

namespace {

std::string size_token(uint32_t bytes) {
    if (bytes >= 1024 && bytes % 1024 == 0) return std::to_string(bytes / 1024) + "K";
    return std::to_string(bytes);
}

}  // namespace

std::string SchemeConfig::sizes_string() const {
    return size_token(small_bytes) + "-" + size_token(medium_bytes) + "-" +
           size_token(large_bytes);
}

std::string SchemeConfig::to_json() const {
    nlohmann::ordered_json j;
    j["scheme"] = to_string(scheme);
    j["scenario"] = to_string(scenario);
    j["sizes"] = sizes_string();
    j["small_bytes"] = small_bytes;
    j["medium_bytes"] = medium_bytes;
    j["large_bytes"] = large_bytes;
    j["main_memory_bytes"] = main_memory_bytes;
    j["zpool_bytes"] = zpool_bytes;
    j["predecomp_buffer_pages"] = predecomp_buffer_pages;
    j["reclaim_low_watermark_bytes"] = effective_low_watermark();
    j["reclaim_high_watermark_bytes"] = effective_high_watermark();
    j["swap_capacity_bytes"] = swap_capacity_bytes == UINT64_MAX
                                   ? nlohmann::ordered_json(nullptr)
                                   : nlohmann::ordered_json(swap_capacity_bytes);
    return j.dump();
}

uint64_t SchemeConfig::effective_low_watermark() const {
    if (reclaim_low_watermark_bytes) return reclaim_low_watermark_bytes;
    return main_memory_bytes / 16 * 15;
}

uint64_t SchemeConfig::effective_high_watermark() const {
    if (reclaim_high_watermark_bytes) return reclaim_high_watermark_bytes;
    return main_memory_bytes / 8 * 7;
}

Engine::Engine(SchemeConfig config, CostModel cost_model,
               std::string swap_backing_path)
    : config_(config),
      cost_(cost_model),
      pool_(config.zpool_bytes),
      swap_(swap_backing_path.empty()
                ? std::make_unique<SwapDevice>(config.swap_capacity_bytes)
                : std::make_unique<SwapDevice>(swap_backing_path,
                                               config.swap_capacity_bytes)) {
    config_.validate();
    cost_.validate();
}

ChunkSizeClass Engine::class_for(HotnessLevel level) const {
    if (config_.scheme == Scheme::ZramBaseline) return ChunkSizeClass(kPageSize);
    switch (level) {
        case HotnessLevel::Hot: return ChunkSizeClass(config_.small_bytes);
        case HotnessLevel::Warm: return ChunkSizeClass(config_.medium_bytes);
        case HotnessLevel::Cold: return ChunkSizeClass(config_.large_bytes);
    }
    return ChunkSizeClass(kPageSize);
}

void Engine::log(std::string action, uint32_t uid, uint64_t pfn,
                 std::optional<HotnessLevel> level, std::optional<uint64_t> sector,
                 uint64_t bytes, double ns) {
    AuditRecord r;
    r.seq = current_seq_;
    r.action = std::move(action);
    r.uid = uid;
    r.pfn = pfn;
    r.level = level;
    r.sector = sector;
    r.bytes = bytes;
    r.ns = ns;
    audit_.push_back(std::move(r));
}

void Engine::make_resident(PageId id, PagePayload payload) {
    resident_[id] = std::move(payload);
    global_lru_.push_front(id);
    lru_pos_[id] = global_lru_.begin();
    hotness_.set_evictable(id, true);
}

void Engine::drop_resident(PageId id) {
    resident_.erase(id);
    auto it = lru_pos_.find(id);
    if (it != lru_pos_.end()) {
        global_lru_.erase(it->second);
        lru_pos_.erase(it);
    }
}

Engine::Window* Engine::open_window(uint32_t uid) {
    auto it = windows_.find(uid);
    if (it == windows_.end() || !it->second.open) return nullptr;
    return &it->second;
}

void Engine::charge_window(uint32_t uid, double ns, double decompress_ns,
                           double compress_ns, uint64_t waste) {
    Window* w = open_window(uid);
    if (!w) return;
    w->report.modeled_latency_ns += ns;
    w->report.decompress_cost_ns += decompress_ns;
    w->report.compress_cost_ns += compress_ns;
    w->report.waste_bytes += waste;
}

std::vector<EngineAction> Engine::step(const TraceEvent& event) {
    if (seen_event_ && event.seq <= last_seq_) {
        throw ProtocolError("step: events must arrive in seq order");
    }
    last_seq_ = event.seq;
    seen_event_ = true;
    current_seq_ = event.seq;
    current_uid_ = event.uid;

    std::vector<EngineAction> actions;
    switch (event.kind) {
        case EventKind::Foreground:
            hotness_.set_foreground(event.uid);
            break;
        case EventKind::LaunchBegin: {
            hotness_.set_foreground(event.uid);
            hotness_.begin_window(event.uid, event.launch);
            for (PageId id : hotness_.hot_snapshot(event.uid)) {
                log("hot_snapshot", id.uid, id.pfn, HotnessLevel::Hot, std::nullopt,
                    0, 0.0);
            }
            Window& w = windows_[event.uid];
            w.open = true;
            w.report = RelaunchReport{};
            w.report.uid = event.uid;
            w.report.launch_ordinal = event.launch;
            break;
        }
        case EventKind::LaunchEnd: {
            RotationSummary summary = hotness_.end_window(event.uid);
            log("rotate", event.uid, 0, std::nullopt, std::nullopt,
                summary.working_set, 0.0);
            Window* w = open_window(event.uid);
            if (w) {
                relaunches_.push_back(w->report);
                w->open = false;
            }
            actions.push_back(EngineAction::Rotate);
            break;
        }
        case EventKind::Touch:
            on_touch(event, actions);
            break;
    }
    maybe_background_reclaim(actions);
    return actions;
}

void Engine::run(const std::vector<TraceEvent>& events) {
    for (const auto& e : events) step(e);
}

void Engine::on_touch(const TraceEvent& event, std::vector<EngineAction>& actions) {
    PageId id = event.page();
    bool in_window = hotness_.window_open(event.uid);
    TouchOutcome outcome = hotness_.touch(id, in_window);
    actions.push_back(EngineAction::Touch);

    Window* w = open_window(event.uid);

    if (outcome.inserted) {
        PagePayload payload = event.payload;
        if (payload.empty()) payload.assign(kPageSize, 0);
        make_resident(id, std::move(payload));
        if (w) {
            w->report.pages_faulted++;
            w->report.from_resident++;
            w->report.modeled_latency_ns += cost_.dram_copy_ns_per_page;
        }
        ensure_resident_capacity(actions);
        return;
    }

    auto res_it = resident_.find(id);
    if (res_it != resident_.end()) {
        // LRU refresh only
        auto pos = lru_pos_.find(id);
        global_lru_.erase(pos->second);
        global_lru_.push_front(id);
        pos->second = global_lru_.begin();
        if (w) {
            w->report.pages_faulted++;
            w->report.from_resident++;
            w->report.modeled_latency_ns += cost_.dram_copy_ns_per_page;
        }
        return;
    }

    FaultResolution res = handle_fault(id, actions);
    if (w) {
        w->report.pages_faulted++;
        switch (res.source) {
            case FaultSource::PredecompBuffer: w->report.from_predecomp++; break;
            case FaultSource::Zpool: w->report.from_zpool++; break;
            case FaultSource::Swap: w->report.from_swap++; break;
            case FaultSource::Resident: w->report.from_resident++; break;
        }
    }
}

FaultResolution Engine::handle_fault(PageId id, std::vector<EngineAction>& actions) {
    prefetched_this_fault_ = false;
    actions.push_back(EngineAction::Fault);
    FaultResolution res;

    // Pre-decompressed data short-circuits the whole decompress path.
    for (auto it = buffer_.begin(); it != buffer_.end(); ++it) {
        if (it->id == id) {
            uint64_t origin_sector = it->origin_sector;
            uint64_t origin_offset = it->origin_offset;
            PagePayload payload = std::move(it->payload);
            buffer_.erase(it);
            counters_.prefetch_hits++;
            make_resident(id, std::move(payload));
            double ns = cost_.dram_copy_ns_per_page;
            res.source = FaultSource::PredecompBuffer;
            res.charged_ns = ns;
            log("fault", id.uid, id.pfn, hotness_.level_of(id), origin_sector,
                kPageSize, ns);
            charge_window(id.uid, ns, 0.0, 0.0, 0);
            if (config_.scheme == Scheme::Ariadne) {
                PrefetchOutcome p = prefetch_next(origin_sector, origin_offset);
                if (p.issued) actions.push_back(EngineAction::Prefetch);
            }
            ensure_resident_capacity(actions);
            return res;
        }
    }

    auto ext_it = page_extent_.find(id);
    if (ext_it == page_extent_.end()) {
        throw LookupError("fault on page with no stored copy (trace inconsistency)");
    }
    uint64_t extent_id = ext_it->second;
    CompressedExtent::Location where = extent_where_.at(extent_id);

    double ns = cost_.dram_copy_ns_per_page;
    double decomp_ns = 0.0;
    double comp_ns = 0.0;
    uint64_t waste = 0;

    if (where == CompressedExtent::Location::Zpool) {
        const CompressedExtent& before = pool_.get(extent_id);
        HotnessLevel klass = before.klass;
        uint64_t sector = before.start_sector;
        uint64_t offset = before.byte_offset;

        ExtractResult r = pool_.extract(extent_id, {id});
        extent_where_.erase(extent_id);
        page_extent_.erase(id);

        decomp_ns = cost_.decompress_cost(r.decompressed_original_bytes,
                                          r.decompress_ops);
        counters_.add_decompress(klass, r.decompressed_original_bytes,
                                 r.decompress_ops);
        counters_.wasted_decompress_bytes += r.wasted_decompressed_bytes;
        waste = r.wasted_decompressed_bytes;

        if (r.remainder_extent_id) {
            if (r.pending_remainder) {
                CompressedExtent rem = std::move(*r.pending_remainder);
                comp_ns = cost_.compress_cost(r.mergeback_original_bytes,
                                              r.mergeback_ops);
                counters_.add_compress(klass, r.mergeback_original_bytes,
                                       rem.total_compressed_bytes, r.mergeback_ops);
                if (ensure_pool_space(rem.total_compressed_bytes)) {
                    place_extent(std::move(rem));
                } else {
                    // Nowhere to keep the remainder compressed; fall back to
                    // making its pages resident and report the exhaustion.
                    std::vector<uint8_t> bytes = decompress(rem.chunks);
                    for (const auto& m : rem.members) {
                        PagePayload p(bytes.begin() + m.offset,
                                      bytes.begin() + m.offset + m.length);
                        make_resident(m.id, std::move(p));
                        page_extent_.erase(m.id);
                    }
                    counters_.oom_reports++;
                    log("oom", id.uid, id.pfn, std::nullopt, std::nullopt, 0, 0.0);
                }
            } else {
                const CompressedExtent& rem = pool_.get(*r.remainder_extent_id);
                comp_ns = cost_.compress_cost(r.mergeback_original_bytes,
                                              r.mergeback_ops);
                counters_.add_compress(klass, r.mergeback_original_bytes,
                                       rem.total_compressed_bytes, r.mergeback_ops);
                extent_where_[rem.extent_id] = CompressedExtent::Location::Zpool;
                for (const auto& m : rem.members) {
                    page_extent_[m.id] = rem.extent_id;
                }
            }
            log("mergeback_compress", id.uid, id.pfn, klass, std::nullopt,
                r.mergeback_original_bytes, comp_ns);
        }

        make_resident(id, std::move(r.pages.at(0).payload));
        ns += decomp_ns + comp_ns;
        res.source = FaultSource::Zpool;
        log("fault", id.uid, id.pfn, hotness_.level_of(id), sector, kPageSize, ns);
        charge_window(id.uid, ns, decomp_ns, comp_ns, waste);
        if (config_.scheme == Scheme::Ariadne) {
            PrefetchOutcome p = prefetch_next(sector, offset);
            if (p.issued) actions.push_back(EngineAction::Prefetch);
        }
    } else {
        uint64_t slot = extent_slot_.at(extent_id);
        CompressedExtent e = swap_->swap_in(slot);
        extent_slot_.erase(extent_id);
        extent_where_.erase(extent_id);
        counters_.swap_in_ops++;
        counters_.swap_in_bytes += e.total_compressed_bytes;
        double flash_ns = cost_.flash_read_cost(e.total_compressed_bytes);
        log("swap_in", id.uid, id.pfn, e.klass, std::nullopt,
            e.total_compressed_bytes, flash_ns);

        std::vector<uint8_t> original = decompress(e.chunks);
        decomp_ns = cost_.decompress_cost(original.size(),
                                          static_cast<uint32_t>(e.chunks.size()));
        counters_.add_decompress(e.klass, original.size(),
                                 static_cast<uint32_t>(e.chunks.size()));

        std::vector<PageRecord> keep;
        PagePayload wanted_payload;
        for (const auto& m : e.members) {
            PagePayload p(original.begin() + m.offset,
                          original.begin() + m.offset + m.length);
            if (m.id == id) {
                wanted_payload = std::move(p);
            } else {
                keep.push_back({m.id, std::move(p)});
                waste += m.length;
            }
        }
        counters_.wasted_decompress_bytes += waste;
        page_extent_.erase(id);

        if (!keep.empty()) {
            CompressedExtent rem =
                make_extent(pool_.new_extent_id(), keep,
                            ChunkSizeClass(e.chunk_class_bytes), e.klass,
                            e.created_seq);
            comp_ns = cost_.compress_cost(rem.original_bytes(),
                                          static_cast<uint32_t>(rem.chunks.size()));
            counters_.add_compress(e.klass, rem.original_bytes(),
                                   rem.total_compressed_bytes,
                                   static_cast<uint32_t>(rem.chunks.size()));
            log("mergeback_compress", id.uid, id.pfn, e.klass, std::nullopt,
                rem.original_bytes(), comp_ns);
            if (ensure_pool_space(rem.total_compressed_bytes)) {
                place_extent(std::move(rem));
            } else {
                for (const auto& rec : keep) {
                    make_resident(rec.id, rec.payload);
                    page_extent_.erase(rec.id);
                }
                counters_.oom_reports++;
                log("oom", id.uid, id.pfn, std::nullopt, std::nullopt, 0, 0.0);
            }
        }

        make_resident(id, std::move(wanted_payload));
        ns += flash_ns + decomp_ns + comp_ns;
        res.source = FaultSource::Swap;
        log("fault", id.uid, id.pfn, hotness_.level_of(id), std::nullopt, kPageSize,
            ns);
        charge_window(id.uid, ns, decomp_ns, comp_ns, waste);
        // v1 pre-decompresses from the zpool only; swap-resident neighbours
        // would need an asynchrony model.
    }

    res.charged_ns = ns;
    ensure_resident_capacity(actions);
    return res;
}

PrefetchOutcome Engine::prefetch_next(uint64_t sector, uint64_t offset) {
    PrefetchOutcome outcome;
    if (config_.scheme != Scheme::Ariadne || prefetched_this_fault_) return outcome;
    if (config_.predecomp_buffer_pages == 0) return outcome;

    std::optional<uint64_t> target = pool_.extent_at_or_after(sector, offset, 0);
    if (!target) return outcome;

    const CompressedExtent& before = pool_.get(*target);
    PageId first = before.members.front().id;
    HotnessLevel klass = before.klass;
    uint64_t target_sector = before.start_sector;
    uint64_t target_offset = before.byte_offset;

    prefetched_this_fault_ = true;
    counters_.prefetch_issued++;

    ExtractResult r = pool_.extract(*target, {first});
    extent_where_.erase(*target);
    page_extent_.erase(first);

    double decomp_ns = cost_.decompress_cost(r.decompressed_original_bytes,
                                             r.decompress_ops);
    counters_.add_decompress(klass, r.decompressed_original_bytes, r.decompress_ops);
    counters_.wasted_decompress_bytes += r.wasted_decompressed_bytes;
    double comp_ns = 0.0;
    if (r.remainder_extent_id) {
        comp_ns = cost_.compress_cost(r.mergeback_original_bytes, r.mergeback_ops);
        if (r.pending_remainder) {
            CompressedExtent rem = std::move(*r.pending_remainder);
            counters_.add_compress(klass, r.mergeback_original_bytes,
                                   rem.total_compressed_bytes, r.mergeback_ops);
            if (ensure_pool_space(rem.total_compressed_bytes)) {
                place_extent(std::move(rem));
            } else {
                std::vector<uint8_t> bytes = decompress(rem.chunks);
                for (const auto& m : rem.members) {
                    PagePayload p(bytes.begin() + m.offset,
                                  bytes.begin() + m.offset + m.length);
                    make_resident(m.id, std::move(p));
                    page_extent_.erase(m.id);
                }
                counters_.oom_reports++;
                log("oom", first.uid, first.pfn, std::nullopt, std::nullopt, 0, 0.0);
            }
        } else {
            const CompressedExtent& rem = pool_.get(*r.remainder_extent_id);
            counters_.add_compress(klass, r.mergeback_original_bytes,
                                   rem.total_compressed_bytes, r.mergeback_ops);
            extent_where_[rem.extent_id] = CompressedExtent::Location::Zpool;
            for (const auto& m : rem.members) page_extent_[m.id] = rem.extent_id;
        }
    }

    // FIFO eviction recompresses the page it displaces.
    if (buffer_.size() == config_.predecomp_buffer_pages) {
        BufferEntry evicted = std::move(buffer_.front());
        buffer_.pop_front();
        counters_.prefetch_wasted++;
        HotnessLevel level = hotness_.level_of(evicted.id);
        CompressedExtent ext = make_extent(
            pool_.new_extent_id(), {{evicted.id, std::move(evicted.payload)}},
            class_for(level), level, current_seq_);
        counters_.add_compress(level, ext.original_bytes(),
                               ext.total_compressed_bytes,
                               static_cast<uint32_t>(ext.chunks.size()));
        log("buffer_evict", evicted.id.uid, evicted.id.pfn, level, std::nullopt,
            kPageSize,
            cost_.compress_cost(ext.original_bytes(),
                                static_cast<uint32_t>(ext.chunks.size())));
        if (ensure_pool_space(ext.total_compressed_bytes)) {
            place_extent(std::move(ext));
        } else {
            std::vector<uint8_t> bytes = decompress(ext.chunks);
            PagePayload p(bytes.begin(), bytes.begin() + kPageSize);
            make_resident(ext.members.front().id, std::move(p));
            counters_.oom_reports++;
            log("oom", evicted.id.uid, evicted.id.pfn, std::nullopt, std::nullopt,
                0, 0.0);
        }
    }

    BufferEntry entry;
    entry.id = first;
    entry.payload = std::move(r.pages.at(0).payload);
    entry.origin_sector = target_sector;
    entry.origin_offset = target_offset;
    buffer_.push_back(std::move(entry));

    log("prefetch", first.uid, first.pfn, klass, target_sector, kPageSize,
        decomp_ns + comp_ns);
    outcome.issued = true;
    outcome.page = first;
    return outcome;
}

bool Engine::ensure_pool_space(uint64_t bytes) {
    while (!pool_.can_fit(bytes)) {
        std::optional<uint64_t> victim = pool_.writeback_victim();
        if (!victim) return false;
        CompressedExtent e = pool_.remove(*victim);
        if (swap_->live_bytes() + e.total_compressed_bytes > swap_->capacity_bytes()) {
            pool_.put(e);  // fits: the removal freed its footprint
            return false;
        }
        uint64_t len = e.total_compressed_bytes;
        HotnessLevel klass = e.klass;
        uint64_t id = e.extent_id;
        PageId tag = e.members.front().id;
        uint64_t slot = swap_->swap_out(std::move(e));
        counters_.swap_out_ops++;
        counters_.swap_out_bytes += len;
        extent_where_[id] = CompressedExtent::Location::Swap;
        extent_slot_[id] = slot;
        log("swap_out", tag.uid, tag.pfn, klass, std::nullopt, len,
            cost_.flash_write_cost(len));
    }
    return true;
}

void Engine::place_extent(CompressedExtent extent) {
    uint64_t id = extent.extent_id;
    std::vector<CompressedExtent::Member> members = extent.members;
    pool_.put(extent);
    extent_where_[id] = CompressedExtent::Location::Zpool;
    for (const auto& m : members) page_extent_[m.id] = id;
}

void Engine::reclaim(uint64_t needed_bytes, bool on_demand,
                     std::vector<EngineAction>& actions) {
    counters_.reclaim_invocations++;
    actions.push_back(EngineAction::Reclaim);
    log("reclaim", 0, 0, std::nullopt, std::nullopt, needed_bytes, 0.0);

    size_t pages_needed =
        static_cast<size_t>((needed_bytes + kPageSize - 1) / kPageSize);

    std::vector<std::pair<PageId, HotnessLevel>> victims;
    if (config_.scheme == Scheme::ZramBaseline) {
        for (auto rit = global_lru_.rbegin();
             rit != global_lru_.rend() && victims.size() < pages_needed; ++rit) {
            victims.emplace_back(*rit, hotness_.level_of(*rit));
        }
    } else {
        victims = hotness_.select_victims(pages_needed,
                                          config_.scenario == Scenario::EHL);
    }

    if (victims.empty()) {
        counters_.oom_reports++;
        log("oom", 0, 0, std::nullopt, std::nullopt, needed_bytes, 0.0);
        actions.push_back(EngineAction::Oom);
        return;
    }

    // On-demand reclaim during a relaunch charges the relauncher's window.
    Window* w = on_demand ? open_window(current_uid_) : nullptr;

    size_t i = 0;
    while (i < victims.size()) {
        HotnessLevel level = victims[i].second;
        uint32_t uid = victims[i].first.uid;
        size_t group = 1;
        if (config_.scheme == Scheme::Ariadne && level == HotnessLevel::Cold) {
            size_t max_group = std::max<uint32_t>(1, config_.large_bytes / kPageSize);
            while (group < max_group && i + group < victims.size() &&
                   victims[i + group].second == level &&
                   victims[i + group].first.uid == uid) {
                ++group;
            }
        }

        std::vector<PageRecord> pages;
        for (size_t k = 0; k < group; ++k) {
            PageId pid = victims[i + k].first;
            pages.push_back({pid, resident_.at(pid)});
        }
        CompressedExtent extent = make_extent(pool_.new_extent_id(), pages,
                                              class_for(level), level, current_seq_);
        uint64_t total = extent.total_compressed_bytes;
        uint64_t orig = extent.original_bytes();
        uint32_t ops = static_cast<uint32_t>(extent.chunks.size());
        double comp_ns = cost_.compress_cost(orig, ops);
        counters_.add_compress(level, orig, total, ops);

        if (!ensure_pool_space(total)) {
            counters_.oom_reports++;
            log("oom", uid, victims[i].first.pfn, level, std::nullopt, total, 0.0);
            actions.push_back(EngineAction::Oom);
            return;  // pages stay resident; both tiers are exhausted
        }
        uint64_t sector = 0;
        {
            uint64_t id = extent.extent_id;
            place_extent(std::move(extent));
            sector = pool_.get(id).start_sector;
        }
        for (size_t k = 0; k < group; ++k) {
            PageId pid = victims[i + k].first;
            drop_resident(pid);
            hotness_.set_evictable(pid, false);
            log("compress", pid.uid, pid.pfn, victims[i + k].second, sector,
                kPageSize, comp_ns / static_cast<double>(group));
        }
        if (w) {
            w->report.modeled_latency_ns += comp_ns;
            w->report.compress_cost_ns += comp_ns;
        }
        i += group;
    }
}

void Engine::ensure_resident_capacity(std::vector<EngineAction>& actions) {
    while (resident_bytes() > config_.main_memory_bytes) {
        uint64_t before = resident_bytes();
        reclaim(before - config_.main_memory_bytes, true, actions);
        if (resident_bytes() >= before) break;  // no progress, exhaustion reported
    }
}

void Engine::maybe_background_reclaim(std::vector<EngineAction>& actions) {
    uint64_t low = config_.effective_low_watermark();
    uint64_t high = config_.effective_high_watermark();
    if (resident_bytes() <= low) return;
    while (resident_bytes() > high) {
        uint64_t before = resident_bytes();
        reclaim(before - high, false, actions);
        if (resident_bytes() >= before) break;
    }
}

RunReport Engine::report(const std::string& trace_id) const {
    RunReport r;
    r.trace_id = trace_id;
    r.config_json = config_.to_json();
    r.counters = counters_;
    r.relaunches = relaunches_;
    for (const auto& rel : relaunches_) r.total_latency_ns += rel.modeled_latency_ns;
    r.cpu = cpu_cost(counters_, cost_);
    r.ratio = compression_ratio(counters_);
    r.flash_write_bytes = counters_.swap_out_bytes;
    return r;
}

void Engine::check_conservation() const {
    pool_.check_conservation();

    std::unordered_map<PageId, int, PageIdHash> seen;
    for (const auto& [id, payload] : resident_) {
        if (payload.size() != kPageSize) {
            throw ProtocolError("conservation: resident page with bad payload size");
        }
        seen[id]++;
    }
    for (const auto& e : buffer_) seen[e.id]++;
    for (const auto& [id, extent_id] : page_extent_) {
        auto wit = extent_where_.find(extent_id);
        if (wit == extent_where_.end()) {
            throw ProtocolError("conservation: page maps to unknown extent");
        }
        if (wit->second == CompressedExtent::Location::Zpool) {
            if (!pool_.contains(extent_id)) {
                throw ProtocolError("conservation: extent missing from zpool");
            }
        } else if (!extent_slot_.count(extent_id) ||
                   !swap_->has_slot(extent_slot_.at(extent_id))) {
            throw ProtocolError("conservation: extent missing from swap");
        }
        seen[id]++;
    }
    for (const auto& [id, count] : seen) {
        if (count != 1) {
            throw ProtocolError("conservation: page present in " +
                                std::to_string(count) + " tiers");
        }
    }
    if (global_lru_.size() != resident_.size()) {
        throw ProtocolError("conservation: LRU list out of sync with residents");
    }
}

}  // namespace aswap
