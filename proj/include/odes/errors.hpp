#ifndef ODES_ERRORS_HPP
#define ODES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace odes {

// Base class for all failures raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

struct DeltaOutOfRange : DomainError {
    explicit DeltaOutOfRange(const std::string& what) : DomainError(what) {}
};

// Integration left the admissible state box; carries the abscissa where it happened.
struct BoxExit : Error {
    double x;
    explicit BoxExit(double where)
        : Error("solution left the state box at x=" + std::to_string(where)), x(where) {}
};

struct StepUnderflow : Error {
    double x;
    explicit StepUnderflow(double where)
        : Error("adaptive step fell below 1e-12 at x=" + std::to_string(where)), x(where) {}
};

struct OracleOrderExceeded : Error {
    explicit OracleOrderExceeded(const std::string& what) : Error(what) {}
};

struct HypothesisViolated : Error {
    explicit HypothesisViolated(const std::string& what) : Error(what) {}
};

struct DomainExceeded : Error {
    explicit DomainExceeded(const std::string& what) : Error(what) {}
};

struct IntegrationFailure : Error {
    explicit IntegrationFailure(const std::string& what) : Error(what) {}
};

struct NoSolutionInRange : Error {
    explicit NoSolutionInRange(const std::string& what) : Error(what) {}
};

struct InsufficientData : Error {
    explicit InsufficientData(const std::string& what) : Error(what) {}
};

struct GammaUnsupported : Error {
    explicit GammaUnsupported(const std::string& what) : Error(what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace odes

#endif
