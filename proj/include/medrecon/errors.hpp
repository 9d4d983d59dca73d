#pragma once

#include <stdexcept>

namespace medrecon {

/// Malformed or unusable input data (bundles, stores, config files).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Transport-level inference failure (connect, timeout, HTTP status).
/// A well-formed but useless model response is data, not an error.
struct backend_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace medrecon
