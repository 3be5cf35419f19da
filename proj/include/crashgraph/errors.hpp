#pragma once

#include <stdexcept>
#include <string>

namespace crashgraph {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input-side failures: the data handed to us is unusable.
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct SchemaVersionError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

// Computation-side failures.
struct IoError : Error {
    using Error::Error;
};
struct PathNotInGraph : Error {
    using Error::Error;
};
struct DegenerateGeometry : Error {
    using Error::Error;
};
struct CyclicGraph : Error {
    using Error::Error;
};
struct UnreachedVertex : Error {
    using Error::Error;
};
struct MissingFeature : Error {
    using Error::Error;
};
struct MissingWeight : Error {
    using Error::Error;
};
struct MissingTiming : Error {
    using Error::Error;
};
struct OrderingViolation : Error {
    using Error::Error;
};
struct MixedWeightKinds : Error {
    using Error::Error;
};

// Raised by detect() so callers see which pipeline stage failed.
struct PipelineError : Error {
    PipelineError(const std::string& stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_name(stage) {}
    std::string stage_name;
};

// True for errors that mean "fix your input", false for internal pipeline failures.
inline bool is_input_error(const Error& e) {
    return dynamic_cast<const ParseError*>(&e) != nullptr ||
           dynamic_cast<const ValidationError*>(&e) != nullptr ||
           dynamic_cast<const SchemaVersionError*>(&e) != nullptr ||
           dynamic_cast<const ConfigError*>(&e) != nullptr;
}

} // namespace crashgraph
