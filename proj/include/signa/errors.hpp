#pragma once

#include <stdexcept>

namespace signa {

// Dimension or rank mismatch between tensors/matrices.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Values outside the numeric domain an operation accepts (NaN/Inf, bad range).
struct NumericError : std::domain_error {
    using std::domain_error::domain_error;
};

// Malformed input files: CSV, GloVe text, checkpoints, dataset containers.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inconsistent or unrealizable configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Filesystem-level failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Misuse of the differentiation graph (missing terminal, double-recorded output).
struct GraphError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace signa
