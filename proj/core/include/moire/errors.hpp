#pragma once

#include <stdexcept>
#include <string>

namespace moire {

/// Tensor or image dimensions do not agree with what an operation requires.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An architecture, training or pipeline configuration is invalid.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data (files, images, manifests) could not be used.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation produced non-finite values or a degenerate system.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace moire
