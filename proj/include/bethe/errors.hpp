#pragma once

#include <stdexcept>
#include <string>

namespace bethe {

// Error taxonomy.  The CLI maps these onto exit codes:
//   validation_error -> 2, numerical_error -> 3, statistical_error -> 4.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

struct statistical_error : std::runtime_error {
    explicit statistical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bethe
