#pragma once

#include <stdexcept>
#include <string>

namespace mshr {

/// Error thrown for invalid inputs, malformed files and I/O failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& message) {
    throw Error(message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition)
        fail(message);
}

} // namespace mshr
