#pragma once

#include <stdexcept>
#include <string>

namespace henonlab {

// Input rejected: an admissibility inequality or an operation precondition is
// violated.  The message names the specific violated condition.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// An iterative solver failed: no bracket, iteration cap, step-size underflow.
// The message carries the diagnostic context (e.g. a sweep table).
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

// A file could not be read, parsed as the expected format, or written.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace henonlab
