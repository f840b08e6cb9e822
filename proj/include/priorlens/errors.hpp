#pragma once

#include <stdexcept>
#include <string>

namespace priorlens {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (non-finite x, gamma <= 0, ...).
struct DomainError : Error {
    using Error::Error;
};

// Analytic prediction requested for a family that has none.
struct UnsupportedFamilyError : Error {
    using Error::Error;
};

// Posterior carries no mass on [t, T_max].
struct DegeneratePosteriorError : Error {
    using Error::Error;
};

// Fewer observations than the estimator needs.
struct InsufficientDataError : Error {
    using Error::Error;
};

// render_prompt called with t outside the scenario grid.
struct RangeError : Error {
    using Error::Error;
};

// Persistent-file header/schema mismatch.
struct FormatError : Error {
    using Error::Error;
};

// A dataset with no usable rows.
struct EmptyDataError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Credential missing or rejected; always fatal for a run.
struct AuthError : Error {
    using Error::Error;
};

} // namespace priorlens
