#pragma once

#include <stdexcept>
#include <string>

namespace pctx {

// Shape/precondition violations on library entry points.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A softmax row with every entry masked out.
struct DegenerateRowError : InputError {
    using InputError::InputError;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pctx
