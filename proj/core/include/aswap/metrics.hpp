#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aswap/errors.hpp"
#include "aswap/types.hpp"

namespace aswap {

// Per-byte / per-op latency and CPU charges used to convert event counts
// into modeled relaunch latency and CPU usage. Defaults are calibration
// knobs; the calibrate command fits the codec constants on the host.
struct CostModel {
    double dram_copy_ns_per_page = 80.0;
    double compress_ns_per_byte = 0.9;
    double compress_ns_per_op = 500.0;
    double decompress_ns_per_byte = 0.35;  // per byte of original data
    double decompress_ns_per_op = 500.0;
    double flash_read_base_ns = 80'000.0;
    double flash_read_ns_per_byte = 10.0;
    double flash_write_base_ns = 200'000.0;
    double flash_write_ns_per_byte = 20.0;

    void validate() const;  // all charges must be >= 0

    double compress_cost(uint64_t original_bytes, uint32_t ops) const {
        return compress_ns_per_byte * static_cast<double>(original_bytes) +
               compress_ns_per_op * ops;
    }
    double decompress_cost(uint64_t original_bytes, uint32_t ops) const {
        return decompress_ns_per_byte * static_cast<double>(original_bytes) +
               decompress_ns_per_op * ops;
    }
    double flash_read_cost(uint64_t bytes) const {
        return flash_read_base_ns + flash_read_ns_per_byte * static_cast<double>(bytes);
    }
    double flash_write_cost(uint64_t bytes) const {
        return flash_write_base_ns + flash_write_ns_per_byte * static_cast<double>(bytes);
    }

    static CostModel from_json(const std::string& text);
    std::string to_json() const;
};

struct ClassCounters {
    uint64_t compress_ops = 0;
    uint64_t compress_bytes_in = 0;
    uint64_t compress_bytes_out = 0;
    uint64_t decompress_ops = 0;
    uint64_t decompress_bytes = 0;  // original bytes decoded
};

// Global event counters for one engine run; monotone within the run.
struct Counters {
    std::array<ClassCounters, 3> by_class{};  // indexed by HotnessLevel

    uint64_t compress_ops = 0;
    uint64_t compress_bytes_in = 0;
    uint64_t compress_bytes_out = 0;
    uint64_t decompress_ops = 0;
    uint64_t decompress_bytes = 0;
    uint64_t wasted_decompress_bytes = 0;
    uint64_t prefetch_issued = 0;
    uint64_t prefetch_hits = 0;
    uint64_t prefetch_wasted = 0;
    uint64_t swap_in_ops = 0;
    uint64_t swap_in_bytes = 0;
    uint64_t swap_out_ops = 0;
    uint64_t swap_out_bytes = 0;
    uint64_t reclaim_invocations = 0;
    uint64_t oom_reports = 0;

    void add_compress(HotnessLevel level, uint64_t bytes_in, uint64_t bytes_out,
                      uint32_t ops);
    void add_decompress(HotnessLevel level, uint64_t original_bytes, uint32_t ops);

    // Associative fold for merging parallel sweep runs.
    Counters& merge(const Counters& other);
};

struct CpuCost {
    double compress_ns = 0.0;
    double decompress_ns = 0.0;
    double total_ns = 0.0;
    std::array<double, 3> compress_ns_by_class{};
    std::array<double, 3> decompress_ns_by_class{};
};

// Linear and monotone in every counter.
CpuCost cpu_cost(const Counters& counters, const CostModel& model);

// Original bytes over compressed bytes; nullopt when nothing was compressed.
std::optional<double> compression_ratio(const Counters& counters);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct RelaunchReport {
    uint32_t uid = 0;
    uint32_t launch_ordinal = 0;
    double modeled_latency_ns = 0.0;
    uint64_t pages_faulted = 0;  // every page access in the window
    uint64_t from_resident = 0;
    uint64_t from_predecomp = 0;
    uint64_t from_zpool = 0;
    uint64_t from_swap = 0;
    double decompress_cost_ns = 0.0;
    double compress_cost_ns = 0.0;  // on-demand reclaim inside the window
    uint64_t waste_bytes = 0;
};

struct RunReport {
    std::string trace_id;
    std::string config_json;  // effective engine configuration
    Counters counters;
    std::vector<RelaunchReport> relaunches;
    // totals
    double total_latency_ns = 0.0;
    CpuCost cpu;
    std::optional<double> ratio;
    uint64_t flash_write_bytes = 0;

    std::string to_json() const;
    static RunReport from_json(const std::string& text);
};

struct CompareRow {
    std::string metric;
    double baseline = 0.0;
    double candidate = 0.0;
    double normalized = 0.0;  // candidate / baseline
};

struct CompareResult {
    std::vector<CompareRow> rows;         // aggregate metrics
    std::vector<CompareRow> per_app;      // per-uid relaunch latency
    std::string text_table() const;
    std::string csv() const;
};

// Baseline is `a`. Throws ComparisonError when trace ids differ.
CompareResult compare(const RunReport& a, const RunReport& b);

}  // namespace aswap
