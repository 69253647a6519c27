#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qnoc {

// Index outside the mesh or circuit.
struct BoundsError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct NoLinkError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProtocolError : std::logic_error {
    using std::logic_error::logic_error;
};

struct NoPlanError : std::logic_error {
    using std::logic_error::logic_error;
};

// Entanglement generation exceeded the configured attempt cap.
struct AttemptCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qnoc
