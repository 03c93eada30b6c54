#pragma once

#include <stdexcept>
#include <string>

namespace mgtaudit {

// Base for every error raised by the library. `exit_code()` maps onto the
// CLI exit codes: 2 config, 3 backend, 4 dataset, 1 anything else.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class BackendError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class DatasetError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

// An embedding lookup for a document or text the backend does not hold.
class MissingEmbeddingError : public BackendError {
public:
    using BackendError::BackendError;
};

// Violated operation precondition (bad sizes, mismatched dims, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// PHD regression slope >= 1: the dimension estimate is undefined.
class UndefinedEstimateError : public Error {
public:
    UndefinedEstimateError(const std::string& what, double slope) : Error(what), slope_(slope) {}
    double slope() const noexcept { return slope_; }

private:
    double slope_;
};

}  // namespace mgtaudit
