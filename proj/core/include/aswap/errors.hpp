#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aswap {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad magic, unknown version, or otherwise unparseable structure.
class FormatError : public Error {
public:
    using Error::Error;
};

// Checksum mismatch. Names the ordinal of the offending record.
class CorruptionError : public Error {
public:
    CorruptionError(const std::string& what, uint64_t record_ordinal)
        : Error(what), record_ordinal(record_ordinal) {}
    uint64_t record_ordinal;
};

// Input ended in the middle of a record.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, uint64_t byte_offset)
        : Error(what), byte_offset(byte_offset) {}
    uint64_t byte_offset;
};

// Read/write failure on a byte sink or source.
class IoError : public Error {
public:
    IoError(const std::string& what, uint64_t byte_offset)
        : Error(what), byte_offset(byte_offset) {}
    uint64_t byte_offset;
};

// A store ran out of room. Carries how many bytes are missing.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, uint64_t shortfall_bytes)
        : Error(what), shortfall_bytes(shortfall_bytes) {}
    uint64_t shortfall_bytes;
};

// Unknown extent id, swap slot, or page.
class LookupError : public Error {
public:
    using Error::Error;
};

// Operation issued against the state machine's protocol
// (out-of-order seq, closing a window that is not open, ...).
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Invalid or infeasible caller-provided specification or configuration.
class SpecError : public Error {
public:
    using Error::Error;
};

// Analysis input too small for the requested statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Requested launch window or index does not exist.
class RangeError : public Error {
public:
    using Error::Error;
};

// Malformed compressed chunk. Names the chunk index.
class CodecError : public Error {
public:
    CodecError(const std::string& what, size_t chunk_index)
        : Error(what), chunk_index(chunk_index) {}
    size_t chunk_index;
};

// Reports being compared do not belong together.
class ComparisonError : public Error {
public:
    using Error::Error;
};

}  // namespace aswap
