#pragma once

#include <stdexcept>

namespace qest {

// Thrown when a numeric argument is outside its documented domain
// (non-finite input, probability outside [0,1], non-positive period, ...).
struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an amplitude pair does not describe a normalized pure state.
struct invalid_state : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when the estimate update would renormalize by a vanishing outcome
// probability (reachable only for projective measurement strength).
struct degenerate_update : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when the closed-form fidelity increment hits its 0/0 configuration.
struct degenerate_geometry : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown when (fidelity, relative half-angle) coordinates disagree.
struct invalid_coordinates : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an averaging window selects no samples.
struct invalid_window : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown by the CLI front end for malformed command lines.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an output file cannot be created or written.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qest
