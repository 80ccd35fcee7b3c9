#pragma once

#include <stdexcept>
#include <string>

namespace apesim {

// Bad scenario/calibration input: unknown keys, out-of-range values,
// contract violations such as scheduling in the past.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A simulation invariant was violated; aborts the run.
struct SimError : std::runtime_error {
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace apesim
