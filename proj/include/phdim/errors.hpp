#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace phdim {

/// Base of every error raised by the library. `kind()` is the stable name
/// written into reports (e.g. "TooFewPoints").
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define PHDIM_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name, what) {}       \
    }

// Geometry / parameter errors.
PHDIM_DEFINE_ERROR(SizeError);
PHDIM_DEFINE_ERROR(ParamError);

// Estimator outcomes a caller is expected to handle per sample.
PHDIM_DEFINE_ERROR(TooFewPoints);
PHDIM_DEFINE_ERROR(UnstableEstimate);
PHDIM_DEFINE_ERROR(DegenerateCloud);

// Detector input errors.
PHDIM_DEFINE_ERROR(DataError);

#undef PHDIM_DEFINE_ERROR

/// File-format errors carry the byte offset at which the problem was found.
class FormatError : public Error {
public:
    FormatError(std::string kind, const std::string& what, std::uint64_t offset)
        : Error(std::move(kind), what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class BadMagic : public FormatError {
public:
    BadMagic(const std::string& what, std::uint64_t offset)
        : FormatError("BadMagic", what, offset) {}
};

class TruncatedFile : public FormatError {
public:
    TruncatedFile(const std::string& what, std::uint64_t offset)
        : FormatError("TruncatedFile", what, offset) {}
};

class TrailingData : public FormatError {
public:
    TrailingData(const std::string& what, std::uint64_t offset)
        : FormatError("TrailingData", what, offset) {}
};

class NonFiniteValue : public FormatError {
public:
    NonFiniteValue(const std::string& what, std::uint64_t offset)
        : FormatError("NonFiniteValue", what, offset) {}
};

/// I/O failures (missing file, unreadable manifest). These are the only
/// errors that make the CLI exit non-zero.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("IoError", what) {}
};

} // namespace phdim
