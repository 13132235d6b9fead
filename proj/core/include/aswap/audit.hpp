#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aswap/types.hpp"

namespace aswap {

// One engine action. Serialized as JSONL with the fixed field set
// {seq, action, uid, pfn, level, sector, bytes, ns}.
struct AuditRecord {
    uint64_t seq = 0;
    std::string action;
    uint32_t uid = 0;
    uint64_t pfn = 0;
    std::optional<HotnessLevel> level;
    std::optional<uint64_t> sector;
    uint64_t bytes = 0;
    double ns = 0.0;
};

void write_audit_jsonl(const std::vector<AuditRecord>& records, std::ostream& sink);
std::vector<AuditRecord> read_audit_jsonl(std::istream& source);
std::vector<AuditRecord> read_audit_file(const std::string& path);

}  // namespace aswap
