#include "aswap/metrics.hpp"

#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace aswap {

void CostModel::validate() const {
    const double v[] = {dram_copy_ns_per_page, compress_ns_per_byte,
                        compress_ns_per_op,    decompress_ns_per_byte,
                        decompress_ns_per_op,  flash_read_base_ns,
                        flash_read_ns_per_byte, flash_write_base_ns,
                        flash_write_ns_per_byte};
    for (double x : v) {
        if (x < 0.0) throw SpecError("cost model charges must be >= 0");
    }
}

CostModel CostModel::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError(std::string("cost model: ") + ex.what());
    }
    CostModel m;
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j[key].get<double>();
    };
    get("dram_copy_ns_per_page", m.dram_copy_ns_per_page);
    get("compress_ns_per_byte", m.compress_ns_per_byte);
    get("compress_ns_per_op", m.compress_ns_per_op);
    get("decompress_ns_per_byte", m.decompress_ns_per_byte);
    get("decompress_ns_per_op", m.decompress_ns_per_op);
    get("flash_read_base_ns", m.flash_read_base_ns);
    get("flash_read_ns_per_byte", m.flash_read_ns_per_byte);
    get("flash_write_base_ns", m.flash_write_base_ns);
    get("flash_write_ns_per_byte", m.flash_write_ns_per_byte);
    m.validate();
    return m;
}

std::string CostModel::to_json() const {
    nlohmann::ordered_json j;
    j["dram_copy_ns_per_page"] = dram_copy_ns_per_page;
    j["compress_ns_per_byte"] = compress_ns_per_byte;
    j["compress_ns_per_op"] = compress_ns_per_op;
    j["decompress_ns_per_byte"] = decompress_ns_per_byte;
    j["decompress_ns_per_op"] = decompress_ns_per_op;
    j["flash_read_base_ns"] = flash_read_base_ns;
    j["flash_read_ns_per_byte"] = flash_read_ns_per_byte;
    j["flash_write_base_ns"] = flash_write_base_ns;
    j["flash_write_ns_per_byte"] = flash_write_ns_per_byte;
    return j.dump(2);
}

void Counters::add_compress(HotnessLevel level, uint64_t bytes_in,
                            uint64_t bytes_out, uint32_t ops) {
    ClassCounters& c = by_class[static_cast<size_t>(level)];
    c.compress_ops += ops;
    c.compress_bytes_in += bytes_in;
    c.compress_bytes_out += bytes_out;
    compress_ops += ops;
    compress_bytes_in += bytes_in;
    compress_bytes_out += bytes_out;
}

void Counters::add_decompress(HotnessLevel level, uint64_t original_bytes,
                              uint32_t ops) {
    ClassCounters& c = by_class[static_cast<size_t>(level)];
    c.decompress_ops += ops;
    c.decompress_bytes += original_bytes;
    decompress_ops += ops;
    decompress_bytes += original_bytes;
}

Counters& Counters::merge(const Counters& o) {
    for (size_t i = 0; i < by_class.size(); ++i) {
        by_class[i].compress_ops += o.by_class[i].compress_ops;
        by_class[i].compress_bytes_in += o.by_class[i].compress_bytes_in;
        by_class[i].compress_bytes_out += o.by_class[i].compress_bytes_out;
        by_class[i].decompress_ops += o.by_class[i].decompress_ops;
        by_class[i].decompress_bytes += o.by_class[i].decompress_bytes;
    }
    compress_ops += o.compress_ops;
    compress_bytes_in += o.compress_bytes_in;
    compress_bytes_out += o.compress_bytes_out;
    decompress_ops += o.decompress_ops;
    decompress_bytes += o.decompress_bytes;
    wasted_decompress_bytes += o.wasted_decompress_bytes;
    prefetch_issued += o.prefetch_issued;
    prefetch_hits += o.prefetch_hits;
    prefetch_wasted += o.prefetch_wasted;
    swap_in_ops += o.swap_in_ops;
    swap_in_bytes += o.swap_in_bytes;
    swap_out_ops += o.swap_out_ops;
    swap_out_bytes += o.swap_out_bytes;
    reclaim_invocations += o.reclaim_invocations;
    oom_reports += o.oom_reports;
    return *this;
}

CpuCost cpu_cost(const Counters& counters, const CostModel& model) {
    CpuCost cost;
    for (size_t i = 0; i < counters.by_class.size(); ++i) {
        const ClassCounters& c = counters.by_class[i];
        cost.compress_ns_by_class[i] = model.compress_cost(
            c.compress_bytes_in, static_cast<uint32_t>(c.compress_ops));
        cost.decompress_ns_by_class[i] = model.decompress_cost(
            c.decompress_bytes, static_cast<uint32_t>(c.decompress_ops));
        cost.compress_ns += cost.compress_ns_by_class[i];
        cost.decompress_ns += cost.decompress_ns_by_class[i];
    }
    cost.total_ns = cost.compress_ns + cost.decompress_ns;
    return cost;
}

std::optional<double> compression_ratio(const Counters& counters) {
    if (counters.compress_bytes_out == 0) return std::nullopt;
    return static_cast<double>(counters.compress_bytes_in) /
           static_cast<double>(counters.compress_bytes_out);
}

namespace {

nlohmann::ordered_json counters_to_json(const Counters& c) {
    nlohmann::ordered_json j;
    j["compress_ops"] = c.compress_ops;
    j["compress_bytes_in"] = c.compress_bytes_in;
    j["compress_bytes_out"] = c.compress_bytes_out;
    j["decompress_ops"] = c.decompress_ops;
    j["decompress_bytes"] = c.decompress_bytes;
    j["wasted_decompress_bytes"] = c.wasted_decompress_bytes;
    j["prefetch_issued"] = c.prefetch_issued;
    j["prefetch_hits"] = c.prefetch_hits;
    j["prefetch_wasted"] = c.prefetch_wasted;
    j["swap_in_ops"] = c.swap_in_ops;
    j["swap_in_bytes"] = c.swap_in_bytes;
    j["swap_out_ops"] = c.swap_out_ops;
    j["swap_out_bytes"] = c.swap_out_bytes;
    j["reclaim_invocations"] = c.reclaim_invocations;
    j["oom_reports"] = c.oom_reports;
    nlohmann::ordered_json classes = nlohmann::ordered_json::array();
    for (size_t i = 0; i < c.by_class.size(); ++i) {
        nlohmann::ordered_json e;
        e["class"] = to_string(static_cast<HotnessLevel>(i));
        e["compress_ops"] = c.by_class[i].compress_ops;
        e["compress_bytes_in"] = c.by_class[i].compress_bytes_in;
        e["compress_bytes_out"] = c.by_class[i].compress_bytes_out;
        e["decompress_ops"] = c.by_class[i].decompress_ops;
        e["decompress_bytes"] = c.by_class[i].decompress_bytes;
        classes.push_back(std::move(e));
    }
    j["by_class"] = std::move(classes);
    return j;
}

Counters counters_from_json(const nlohmann::json& j) {
    Counters c;
    c.compress_ops = j.at("compress_ops").get<uint64_t>();
    c.compress_bytes_in = j.at("compress_bytes_in").get<uint64_t>();
    c.compress_bytes_out = j.at("compress_bytes_out").get<uint64_t>();
    c.decompress_ops = j.at("decompress_ops").get<uint64_t>();
    c.decompress_bytes = j.at("decompress_bytes").get<uint64_t>();
    c.wasted_decompress_bytes = j.at("wasted_decompress_bytes").get<uint64_t>();
    c.prefetch_issued = j.at("prefetch_issued").get<uint64_t>();
    c.prefetch_hits = j.at("prefetch_hits").get<uint64_t>();
    c.prefetch_wasted = j.at("prefetch_wasted").get<uint64_t>();
    c.swap_in_ops = j.at("swap_in_ops").get<uint64_t>();
    c.swap_in_bytes = j.at("swap_in_bytes").get<uint64_t>();
    c.swap_out_ops = j.at("swap_out_ops").get<uint64_t>();
    c.swap_out_bytes = j.at("swap_out_bytes").get<uint64_t>();
    c.reclaim_invocations = j.at("reclaim_invocations").get<uint64_t>();
    c.oom_reports = j.at("oom_reports").get<uint64_t>();
    size_t i = 0;
    for (const auto& e : j.at("by_class")) {
        if (i >= c.by_class.size()) break;
        c.by_class[i].compress_ops = e.at("compress_ops").get<uint64_t>();
        c.by_class[i].compress_bytes_in = e.at("compress_bytes_in").get<uint64_t>();
        c.by_class[i].compress_bytes_out = e.at("compress_bytes_out").get<uint64_t>();
        c.by_class[i].decompress_ops = e.at("decompress_ops").get<uint64_t>();
        c.by_class[i].decompress_bytes = e.at("decompress_bytes").get<uint64_t>();
        ++i;
    }
    return c;
}

}  // namespace

std::string RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["trace-id"] = trace_id;
    j["config"] = nlohmann::ordered_json::parse(config_json);
    j["counters"] = counters_to_json(counters);
    nlohmann::ordered_json rel = nlohmann::ordered_json::array();
    for (const auto& r : relaunches) {
        nlohmann::ordered_json e;
        e["uid"] = r.uid;
        e["launch"] = r.launch_ordinal;
        e["latency_ns"] = r.modeled_latency_ns;
        e["pages_faulted"] = r.pages_faulted;
        e["from_resident"] = r.from_resident;
        e["from_predecomp"] = r.from_predecomp;
        e["from_zpool"] = r.from_zpool;
        e["from_swap"] = r.from_swap;
        e["decompress_cost_ns"] = r.decompress_cost_ns;
        e["compress_cost_ns"] = r.compress_cost_ns;
        e["waste_bytes"] = r.waste_bytes;
        rel.push_back(std::move(e));
    }
    j["relaunches"] = std::move(rel);
    nlohmann::ordered_json totals;
    totals["latency_ns"] = total_latency_ns;
    totals["cpu_compress_ns"] = cpu.compress_ns;
    totals["cpu_decompress_ns"] = cpu.decompress_ns;
    totals["cpu_total_ns"] = cpu.total_ns;
    if (ratio) totals["compression_ratio"] = *ratio;
    else totals["compression_ratio"] = nullptr;
    totals["flash_write_bytes"] = flash_write_bytes;
    j["totals"] = std::move(totals);
    return j.dump(2);
}

RunReport RunReport::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError(std::string("report: ") + ex.what());
    }
    RunReport r;
    r.trace_id = j.at("trace-id").get<std::string>();
    r.config_json = j.at("config").dump();
    r.counters = counters_from_json(j.at("counters"));
    for (const auto& e : j.at("relaunches")) {
        RelaunchReport rel;
        rel.uid = e.at("uid").get<uint32_t>();
        rel.launch_ordinal = e.at("launch").get<uint32_t>();
        rel.modeled_latency_ns = e.at("latency_ns").get<double>();
        rel.pages_faulted = e.at("pages_faulted").get<uint64_t>();
        rel.from_resident = e.at("from_resident").get<uint64_t>();
        rel.from_predecomp = e.at("from_predecomp").get<uint64_t>();
        rel.from_zpool = e.at("from_zpool").get<uint64_t>();
        rel.from_swap = e.at("from_swap").get<uint64_t>();
        rel.decompress_cost_ns = e.at("decompress_cost_ns").get<double>();
        rel.compress_cost_ns = e.at("compress_cost_ns").get<double>();
        rel.waste_bytes = e.at("waste_bytes").get<uint64_t>();
        r.relaunches.push_back(rel);
    }
    const auto& totals = j.at("totals");
    r.total_latency_ns = totals.at("latency_ns").get<double>();
    r.cpu.compress_ns = totals.at("cpu_compress_ns").get<double>();
    r.cpu.decompress_ns = totals.at("cpu_decompress_ns").get<double>();
    r.cpu.total_ns = totals.at("cpu_total_ns").get<double>();
    if (!totals.at("compression_ratio").is_null()) {
        r.ratio = totals.at("compression_ratio").get<double>();
    }
    r.flash_write_bytes = totals.at("flash_write_bytes").get<uint64_t>();
    return r;
}

CompareResult compare(const RunReport& a, const RunReport& b) {
    if (a.trace_id != b.trace_id) {
        throw ComparisonError("reports come from different traces: " + a.trace_id +
                              " vs " + b.trace_id);
    }
    auto ratio_of = [](double x, double y) {
        return x == 0.0 ? (y == 0.0 ? 1.0 : 0.0) : y / x;
    };
    CompareResult out;
    auto row = [&](const std::string& name, double x, double y) {
        out.rows.push_back({name, x, y, ratio_of(x, y)});
    };
    row("relaunch_latency_ns", a.total_latency_ns, b.total_latency_ns);
    row("cpu_total_ns", a.cpu.total_ns, b.cpu.total_ns);
    row("cpu_compress_ns", a.cpu.compress_ns, b.cpu.compress_ns);
    row("cpu_decompress_ns", a.cpu.decompress_ns, b.cpu.decompress_ns);
    row("compression_ratio", a.ratio.value_or(0.0), b.ratio.value_or(0.0));
    row("flash_write_bytes", static_cast<double>(a.flash_write_bytes),
        static_cast<double>(b.flash_write_bytes));

    std::map<uint32_t, std::pair<double, double>> per_app;
    for (const auto& r : a.relaunches) per_app[r.uid].first += r.modeled_latency_ns;
    for (const auto& r : b.relaunches) per_app[r.uid].second += r.modeled_latency_ns;
    for (const auto& [uid, pair] : per_app) {
        out.per_app.push_back({"uid_" + std::to_string(uid) + "_latency_ns",
                               pair.first, pair.second,
                               ratio_of(pair.first, pair.second)});
    }
    return out;
}

std::string CompareResult::text_table() const {
    std::ostringstream os;
    os << std::left << std::setw(28) << "metric" << std::right << std::setw(18)
       << "baseline" << std::setw(18) << "candidate" << std::setw(12)
       << "normalized" << '\n';
    auto emit = [&](const CompareRow& r) {
        os << std::left << std::setw(28) << r.metric << std::right
           << std::setw(18) << std::setprecision(6) << std::fixed << r.baseline
           << std::setw(18) << r.candidate << std::setw(12) << std::setprecision(4)
           << r.normalized << '\n';
    };
    for (const auto& r : rows) emit(r);
    for (const auto& r : per_app) emit(r);
    return os.str();
}

std::string CompareResult::csv() const {
    std::ostringstream os;
    os << "metric,baseline,candidate,normalized\n";
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.metric << ',' << r.baseline << ',' << r.candidate << ','
           << r.normalized << '\n';
    }
    for (const auto& r : per_app) {
        os << r.metric << ',' << r.baseline << ',' << r.candidate << ','
           << r.normalized << '\n';
    }
    return os.str();
}

}  // namespace aswap
