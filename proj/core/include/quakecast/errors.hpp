#pragma once

#include <stdexcept>
#include <string>

namespace quakecast {

/// Bad user input: malformed files, invalid configs, violated preconditions.
/// The CLI maps this to exit code 1; everything else lands on 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace quakecast
