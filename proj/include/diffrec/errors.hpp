#pragma once

#include <stdexcept>
#include <string>

namespace diffrec {

/// Coarse failure categories, used by the CLI to pick an exit code.
enum class ErrorCategory {
    invalid_grid,
    evaluation,
    domain,
    out_of_range,
    degenerate_kernel,
    coefficient,
    oracle_failure,
    data_inconsistent,
    not_converged,
    config,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& what_arg)
        : std::runtime_error(what_arg), category_(cat) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct InvalidGrid : Error {
    explicit InvalidGrid(const std::string& m) : Error(ErrorCategory::invalid_grid, m) {}
};

struct EvaluationError : Error {
    explicit EvaluationError(const std::string& m) : Error(ErrorCategory::evaluation, m) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error(ErrorCategory::domain, m) {}
};

struct OutOfRange : Error {
    explicit OutOfRange(const std::string& m) : Error(ErrorCategory::out_of_range, m) {}
};

struct DegenerateKernel : Error {
    explicit DegenerateKernel(const std::string& m) : Error(ErrorCategory::degenerate_kernel, m) {}
};

struct CoefficientError : Error {
    explicit CoefficientError(const std::string& m) : Error(ErrorCategory::coefficient, m) {}
};

struct OracleFailure : Error {
    explicit OracleFailure(const std::string& m) : Error(ErrorCategory::oracle_failure, m) {}
};

struct DataInconsistent : Error {
    explicit DataInconsistent(const std::string& m) : Error(ErrorCategory::data_inconsistent, m) {}
};

struct NotConverged : Error {
    explicit NotConverged(const std::string& m) : Error(ErrorCategory::not_converged, m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorCategory::config, m) {}
};

} // namespace diffrec
