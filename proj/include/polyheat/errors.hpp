#pragma once

#include <stdexcept>
#include <string>

namespace polyheat {

/// Invalid call arguments: dimension mismatch, out-of-range index, point outside the domain.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Weight parameters outside the admissible range of the domain.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds a resource cap (degree, node count, spectral band).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Floating point accuracy target cannot be met at the requested size.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation too close to a boundary where the chart or weight degenerates.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation declined to produce a value it cannot certify.
class RefusalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace polyheat
