#pragma once

#include <stdexcept>
#include <string>

namespace hdl {

// Error taxonomy. Callers catch by category; the CLI maps categories to
// exit codes (input/structure -> 2, numeric/state -> 3).

// Bad arguments, unknown labels, malformed files, unsupported requests.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated structural invariants: cycles, coefficient/edge mismatch.
struct structure_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Singular or ill-conditioned linear algebra, non-PD covariance.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incremental state used out of sync with its inputs.
struct state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hdl
