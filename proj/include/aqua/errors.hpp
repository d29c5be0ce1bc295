#pragma once

#include <stdexcept>
#include <string>

namespace aqua {

// Exit-code mapping lives in the CLI: usage errors -> 1,
// data/format/dimension errors -> 2, degenerate math -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct ParameterError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct DegenerateMathError : Error {
    using Error::Error;
};

}  // namespace aqua
