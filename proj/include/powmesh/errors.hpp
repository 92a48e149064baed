#pragma once

#include <stdexcept>
#include <string>

namespace powmesh {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input files that do not tokenize/shape as expected.
struct ParseError : Error {
    using Error::Error;
};

// Well-formed input whose values break a documented invariant.
struct ValidationError : Error {
    using Error::Error;
};

struct NoMinersError : Error {
    NoMinersError() : Error("network contains no miner with positive mining power") {}
};

struct InfeasibleTopologyError : Error {
    using Error::Error;
};

struct InfeasiblePartitionError : Error {
    using Error::Error;
};

struct IncompleteTraceError : Error {
    using Error::Error;
};

struct BoundsViolationError : Error {
    using Error::Error;
};

}  // namespace powmesh
