#pragma once

#include <stdexcept>
#include <string>

namespace ssnb {

// File system / stream failures. The CLI maps these to exit code 1.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad inputs: malformed files, out-of-range labels, dimension mismatches,
// invalid configuration. The CLI maps these to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ssnb
