#ifndef EIDESIGN_ERRORS_HPP
#define EIDESIGN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eidesign {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Vector/point length does not match the model dimension or basis size.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Information matrix is numerically singular at a point where its inverse
// is required; carries the condition estimate that triggered the failure.
class SingularInformationError : public Error {
public:
    SingularInformationError(const std::string& msg, double condition_estimate)
        : Error(msg), condition_estimate(condition_estimate) {}
    double condition_estimate;
};

// The multiplicative update denominator vanished (inv(I)*B == 0).
class FeasibilityError : public Error {
public:
    explicit FeasibilityError(const std::string& msg) : Error(msg) {}
};

// Basis functions are numerically linearly dependent under the measure.
class DependentBasisError : public Error {
public:
    DependentBasisError(const std::string& msg, int term_index)
        : Error(msg), term_index(term_index) {}
    int term_index;
};

// Quadrature cannot be applied to the measure, or produced non-finite values.
class QuadratureError : public Error {
public:
    explicit QuadratureError(const std::string& msg) : Error(msg) {}
};

// Configuration parse or validation failure; message carries the field path.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// File/directory I/O failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace eidesign

#endif  // EIDESIGN_ERRORS_HPP
