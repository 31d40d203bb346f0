#pragma once

#include <stdexcept>
#include <string>

namespace ludobench {

/// Base of every error raised by the engine. `exit_code()` maps onto the CLI
/// contract: 1 configuration, 2 integrity, 3 transport.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class InfiniteDivergenceError : public Error {
public:
    using Error::Error;
};

class DegenerateDirectionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    TrainingError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class MalformedAnswerError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class IntegrityError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class ComparabilityError : public Error {
public:
    using Error::Error;
};

}  // namespace ludobench
