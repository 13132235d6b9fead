#include "aswap/audit.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "aswap/errors.hpp"

namespace aswap {

void write_audit_jsonl(const std::vector<AuditRecord>& records, std::ostream& sink) {
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["seq"] = r.seq;
        j["action"] = r.action;
        j["uid"] = r.uid;
        j["pfn"] = r.pfn;
        if (r.level) j["level"] = to_string(*r.level);
        else j["level"] = nullptr;
        if (r.sector) j["sector"] = *r.sector;
        else j["sector"] = nullptr;
        j["bytes"] = r.bytes;
        j["ns"] = r.ns;
        sink << j.dump() << '\n';
    }
    sink.flush();
}

std::vector<AuditRecord> read_audit_jsonl(std::istream& source) {
    std::vector<AuditRecord> records;
    std::string line;
    uint64_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw FormatError("audit line " + std::to_string(lineno) + ": " + ex.what());
        }
        AuditRecord r;
        r.seq = j.at("seq").get<uint64_t>();
        r.action = j.at("action").get<std::string>();
        r.uid = j.at("uid").get<uint32_t>();
        r.pfn = j.at("pfn").get<uint64_t>();
        if (j.contains("level") && !j["level"].is_null()) {
            std::string level = j["level"].get<std::string>();
            if (level == "hot") r.level = HotnessLevel::Hot;
            else if (level == "warm") r.level = HotnessLevel::Warm;
            else if (level == "cold") r.level = HotnessLevel::Cold;
            else throw FormatError("audit line " + std::to_string(lineno) +
                                   ": bad level '" + level + "'");
        }
        if (j.contains("sector") && !j["sector"].is_null()) {
            r.sector = j["sector"].get<uint64_t>();
        }
        if (j.contains("bytes")) r.bytes = j["bytes"].get<uint64_t>();
        if (j.contains("ns")) r.ns = j["ns"].get<double>();
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<AuditRecord> read_audit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open audit file: " + path, 0);
    return read_audit_jsonl(in);
}

}  // namespace aswap
