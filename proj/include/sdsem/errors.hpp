#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sdsem {

/// Root of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- spec files -----------------------------------------------------------

class ParseError : public Error {
public:
    using Error::Error;
};

/// Missing/extra/ill-typed field. `field()` is the dotted path of the offender.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct Violation {
    std::string location;
    std::string rule;
    std::string message;

    bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report);
    [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

class CycleError : public Error {
public:
    using Error::Error;
};

// --- numerics -------------------------------------------------------------

class DomainError : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

/// Non-finite intermediate or a state beyond the overflow guard.
class OverflowError : public Error {
public:
    OverflowError(const std::string& message, double time)
        : Error(message), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class OracleMismatch : public Error {
public:
    using Error::Error;
};

// --- SEM bridge -----------------------------------------------------------

class NotLinear : public Error {
public:
    using Error::Error;
};

class HasStocks : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

// --- fit ------------------------------------------------------------------

class PerfectFit : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class AllZeroObserved : public Error {
public:
    using Error::Error;
};

class OutOfSpan : public Error {
public:
    using Error::Error;
};

// --- generator ------------------------------------------------------------

class ExhaustedAttempts : public Error {
public:
    ExhaustedAttempts(const std::string& message, std::map<std::string, int> causes)
        : Error(message), causes_(std::move(causes)) {}
    [[nodiscard]] const std::map<std::string, int>& causes() const noexcept { return causes_; }

private:
    std::map<std::string, int> causes_;
};

}  // namespace sdsem
