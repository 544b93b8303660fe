#pragma once

#include <stdexcept>
#include <string>

namespace kfs {

// Values double as CLI exit codes.
enum class ErrorCategory : int {
    config = 2,
    numerical = 3,
    resource = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }
    const char* category_name() const noexcept;

private:
    ErrorCategory category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class NotApplicableError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class GridTooSmallError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CutoffTooSmallError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateSteadyStateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& what) : Error(ErrorCategory::resource, what) {}
};

inline const char* Error::category_name() const noexcept {
    switch (category_) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::resource: return "resource";
    }
    return "unknown";
}

}  // namespace kfs
