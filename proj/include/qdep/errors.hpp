#pragma once

#include <stdexcept>
#include <string>

namespace qdep {

// Base class for all library errors. Subclasses name the condition so
// callers can map failures to exit codes without string matching.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- data / input errors ------------------------------------------------

struct LengthMismatch : Error {
    using Error::Error;
};

struct NonFiniteValue : Error {
    using Error::Error;
};

// Duplicate values in a margin under TiePolicy::Error. Continuous margins
// are assumed throughout; callers wanting to proceed anyway should rerun
// with seeded random tie breaking.
struct TiesPresent : Error {
    using Error::Error;
};

struct SampleTooSmall : Error {
    using Error::Error;
};

struct FileNotFound : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, long line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    long line;
};

// -- argument / configuration errors ------------------------------------

struct DomainError : Error {
    using Error::Error;
};

struct DegenerateRegion : Error {
    using Error::Error;
};

struct SmoothingRadiusTooLarge : Error {
    using Error::Error;
};

struct InvalidParameter : Error {
    using Error::Error;
};

struct UnknownModel : Error {
    using Error::Error;
};

// -- calibration errors --------------------------------------------------

struct InvalidPoolSize : Error {
    using Error::Error;
};

struct EmptyPool : Error {
    using Error::Error;
};

struct MismatchedPool : Error {
    using Error::Error;
};

}  // namespace qdep
