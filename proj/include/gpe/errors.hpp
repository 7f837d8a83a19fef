#ifndef GPE_ERRORS_HPP
#define GPE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpe {

/// Field/grid shape mismatch or non-finite amplitudes.
struct InvalidFieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Grid construction from an invalid specification.
struct InvalidGridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested coordinates outside the computational box.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operation called outside its supported parameter regime.
struct UnsupportedRegimeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input not normalized where unit norm is required.
struct NormalizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative solver failed to reach its tolerance.
struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& what, double last_residual_, int iterations_)
        : std::runtime_error(what), last_residual(last_residual_), iterations(iterations_) {}
    double last_residual = 0.0;
    int iterations = 0;
};

/// Snapshot file with a bad magic number or unsupported version.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Snapshot file whose header and payload disagree, or truncated data.
struct CorruptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or incomplete run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem failures while reading or writing run outputs.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gpe

#endif
