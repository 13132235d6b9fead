#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "aswap/trace.hpp"

namespace aswap {

namespace {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

uint64_t mix3(uint64_t a, uint64_t b, uint64_t c) {
    return mix64(mix64(a) ^ mix64(b ^ 0x5851f42d4c957f2dull) ^ mix64(c + 1));
}

// Hand-rolled so the output does not depend on the standard library's
// distribution implementations.
uint64_t rand_below(std::mt19937_64& rng, uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rand_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Per-app byte template for the templated-redundant model: a small motif
// dictionary tiled into a repeating period, so sub-page chunks see local
// redundancy and multi-page chunks see cross-page redundancy.
std::vector<uint8_t> build_template(uint64_t seed, uint32_t uid, uint32_t period) {
    std::mt19937_64 rng(mix3(seed, uid, 0xA11CE));
    constexpr uint32_t kMotif = 16;
    constexpr uint32_t kMotifCount = 8;
    std::vector<std::array<uint8_t, kMotif>> motifs(kMotifCount);
    for (auto& m : motifs) {
        for (auto& b : m) b = static_cast<uint8_t>(rng());
    }
    std::vector<uint8_t> tmpl;
    tmpl.reserve(period);
    while (tmpl.size() < period) {
        const auto& m = motifs[rand_below(rng, kMotifCount)];
        size_t take = std::min<size_t>(kMotif, period - tmpl.size());
        tmpl.insert(tmpl.end(), m.begin(), m.begin() + take);
    }
    return tmpl;
}

std::vector<uint8_t> page_payload(PayloadModel model, uint64_t seed, uint32_t uid,
                                  uint64_t pfn, const std::vector<uint8_t>& tmpl) {
    std::vector<uint8_t> page(kPageSize);
    std::mt19937_64 rng(mix3(seed, uid, pfn));
    switch (model) {
        case PayloadModel::Random: {
            for (auto& b : page) b = static_cast<uint8_t>(rng());
            break;
        }
        case PayloadModel::ZeroRuns: {
            size_t pos = 0;
            while (pos < page.size()) {
                size_t zeros = 128 + rand_below(rng, 896);
                pos = std::min(page.size(), pos + zeros);
                size_t noise = 32 + rand_below(rng, 224);
                for (size_t i = 0; i < noise && pos < page.size(); ++i, ++pos) {
                    page[pos] = static_cast<uint8_t>(rng());
                }
            }
            break;
        }
        case PayloadModel::TemplatedRedundant: {
            for (size_t i = 0; i < page.size(); ++i) {
                page[i] = tmpl[i % tmpl.size()];
            }
            for (int i = 0; i < 8; ++i) {
                page[i] = static_cast<uint8_t>(pfn >> (8 * i));
            }
            // sparse per-page mutations keep pages distinct without
            // destroying cross-page matches
            for (int i = 0; i < 32; ++i) {
                size_t pos = 8 + rand_below(rng, page.size() - 8);
                page[pos] ^= static_cast<uint8_t>(rng() | 1);
            }
            break;
        }
    }
    return page;
}

struct Run {
    uint64_t first = 0;
    uint32_t len = 0;
};

struct AppState {
    uint32_t uid = 0;
    uint64_t next_pfn = 0;
    std::vector<Run> hot;
    std::deque<std::pair<Run, uint32_t>> retired;  // run, cycle it was dropped
    std::vector<Run> cold;
    std::vector<bool> touched;  // first-touch tracking, indexed by pfn
    std::vector<uint8_t> tmpl;
};

uint64_t run_pages(const std::vector<Run>& runs) {
    uint64_t n = 0;
    for (const auto& r : runs) n += r.len;
    return n;
}

}  // namespace

void GeneratorSpec::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(hot_similarity) || !in_unit(reuse) || !in_unit(consecutive2)) {
        throw SpecError("generator fractions must lie in [0,1]");
    }
    if (reuse < hot_similarity) {
        throw SpecError(
            "infeasible targets: reuse must be >= hot_similarity because pages kept "
            "hot across a relaunch always count as reused");
    }
    if (pages_per_app < 1) throw SpecError("pages_per_app must be >= 1");
    if (app_count < 1) throw SpecError("app_count must be >= 1");
    if (relaunch_count < 1) throw SpecError("relaunch_count must be >= 1");
    if (payload_model == PayloadModel::TemplatedRedundant &&
        (repeat_period < 16 || repeat_period > kPageSize)) {
        throw SpecError("repeat_period must lie in [16, 4096]");
    }
}

std::vector<TraceEvent> generate(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(mix64(spec.rng_seed));

    const uint64_t pool = spec.pages_per_app;
    const uint64_t hot_target = std::max<uint64_t>(std::min<uint64_t>(64, pool), pool / 4);
    const uint64_t cold_fill_per_cycle = pool / 8;
    const uint32_t run_cap = 1024;

    std::vector<AppState> apps(spec.app_count);
    for (uint32_t a = 0; a < spec.app_count; ++a) {
        apps[a].uid = a + 1;
        apps[a].touched.assign(pool, false);
        if (spec.payload_model == PayloadModel::TemplatedRedundant) {
            apps[a].tmpl = build_template(spec.rng_seed, apps[a].uid, spec.repeat_period);
        }
    }

    std::vector<TraceEvent> out;
    uint64_t seq = 0;

    auto geometric_len = [&](uint64_t remaining) -> uint32_t {
        uint32_t len = 1;
        double p = spec.consecutive2;
        uint64_t cap = std::min<uint64_t>(run_cap, remaining);
        while (len < cap &&
               static_cast<double>(rng() >> 11) * 0x1.0p-53 < p) {
            ++len;
        }
        return len;
    };

    // Fresh pfn space first, then runs retired in an earlier cycle, then the
    // oldest cold-fill run. Taking pages that are no longer in the previous
    // hot set keeps the similarity/reuse bookkeeping intact.
    auto alloc_run = [&](AppState& app, uint32_t cycle) -> std::optional<Run> {
        if (app.next_pfn < pool) {
            uint32_t len = geometric_len(pool - app.next_pfn);
            Run r{app.next_pfn, len};
            app.next_pfn += len;
            return r;
        }
        if (!app.retired.empty() && app.retired.front().second < cycle) {
            Run r = app.retired.front().first;
            app.retired.pop_front();
            return r;
        }
        if (!app.cold.empty()) {
            Run r = app.cold.front();
            app.cold.erase(app.cold.begin());
            return r;
        }
        if (!app.retired.empty()) {
            Run r = app.retired.front().first;
            app.retired.pop_front();
            return r;
        }
        return std::nullopt;
    };

    auto touch = [&](AppState& app, uint64_t pfn) {
        std::vector<uint8_t> payload;
        if (pfn < app.touched.size() && !app.touched[pfn]) {
            app.touched[pfn] = true;
            payload = page_payload(spec.payload_model, spec.rng_seed, app.uid, pfn,
                                   app.tmpl);
        }
        out.push_back(TraceEvent::touch(seq++, app.uid, pfn, std::move(payload)));
    };

    auto touch_run_prefix = [&](AppState& app, const Run& r, uint32_t n) {
        for (uint32_t i = 0; i < n; ++i) touch(app, r.first + i);
    };

    for (uint32_t cycle = 0; cycle < spec.relaunch_count; ++cycle) {
        for (auto& app : apps) {
            std::vector<Run> dropped;
            uint64_t prev_hot_pages = run_pages(app.hot);
            uint64_t kept_pages = 0;

            if (cycle == 0) {
                while (run_pages(app.hot) < hot_target) {
                    auto r = alloc_run(app, cycle);
                    if (!r) break;
                    app.hot.push_back(*r);
                }
            } else {
                // Keep whole runs until the similarity share is covered,
                // drop the rest, and top back up with fresh runs.
                shuffle_vec(app.hot, rng);
                uint64_t target_keep = static_cast<uint64_t>(
                    std::llround(spec.hot_similarity * static_cast<double>(hot_target)));
                std::vector<Run> kept;
                for (const auto& r : app.hot) {
                    if (kept_pages < target_keep) {
                        kept.push_back(r);
                        kept_pages += r.len;
                    } else {
                        dropped.push_back(r);
                    }
                }
                app.hot = std::move(kept);
                while (run_pages(app.hot) < hot_target) {
                    auto r = alloc_run(app, cycle);
                    if (!r) break;
                    app.hot.push_back(*r);
                }
            }

            out.push_back(TraceEvent::foreground(seq++, app.uid));
            out.push_back(TraceEvent::launch_begin(seq++, app.uid, cycle));
            std::vector<Run> order = app.hot;
            shuffle_vec(order, rng);
            for (const auto& r : order) touch_run_prefix(app, r, r.len);
            out.push_back(TraceEvent::launch_end(seq++, app.uid));

            // Execution phase. Touching dropped pages here places them in the
            // warm set of this window, which is what the reuse target counts.
            if (cycle > 0 && prev_hot_pages > 0) {
                uint64_t reuse_target = static_cast<uint64_t>(
                    std::llround(spec.reuse * static_cast<double>(prev_hot_pages)));
                uint64_t need = reuse_target > kept_pages ? reuse_target - kept_pages : 0;
                shuffle_vec(dropped, rng);
                for (const auto& r : dropped) {
                    if (need == 0) break;
                    uint32_t take = static_cast<uint32_t>(std::min<uint64_t>(r.len, need));
                    touch_run_prefix(app, r, take);
                    need -= take;
                }
            }
            for (const auto& r : dropped) app.retired.emplace_back(r, cycle);

            // Light re-reads of current hot data, as execution would do.
            {
                std::vector<Run> again = app.hot;
                shuffle_vec(again, rng);
                again.resize(again.size() / 2);
                for (const auto& r : again) touch_run_prefix(app, r, r.len);
            }

            // Grow the cold footprint while the page budget lasts.
            uint64_t filled = 0;
            while (filled < cold_fill_per_cycle && app.next_pfn < pool) {
                auto r = alloc_run(app, cycle);
                if (!r) break;
                touch_run_prefix(app, *r, r->len);
                app.cold.push_back(*r);
                filled += r->len;
            }
        }
    }
    return out;
}

std::vector<uint8_t> synth_corpus(PayloadModel model, uint32_t repeat_period,
                                  uint64_t seed, size_t bytes) {
    std::vector<uint8_t> tmpl;
    if (model == PayloadModel::TemplatedRedundant) {
        tmpl = build_template(seed, 0, repeat_period);
    }
    std::vector<uint8_t> corpus;
    corpus.reserve(bytes);
    uint64_t pfn = 0;
    while (corpus.size() < bytes) {
        auto page = page_payload(model, seed, 0, pfn++, tmpl);
        size_t take = std::min(page.size(), bytes - corpus.size());
        corpus.insert(corpus.end(), page.begin(), page.begin() + take);
    }
    return corpus;
}

}  // namespace aswap
