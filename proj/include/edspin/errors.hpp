#pragma once

#include <stdexcept>
#include <string>

namespace edspin {

// Error taxonomy shared by the library and the CLI. Each kind maps to a
// distinct process exit code in tools/edspin_main.cpp.
enum class ErrorKind {
    parameter, // invalid arguments / preconditions
    parse,     // malformed input file (FCIDUMP, ...)
    config,    // bad run configuration
    integrity, // inconsistent data (conflicting duplicate integrals, ...)
    solver,    // eigensolver failure (non-convergence, residual violation)
    labeling,  // spin labeling failed
    internal,  // broken invariant inside the library
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& m) : Error(ErrorKind::parameter, m) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error(ErrorKind::parse, m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};
struct IntegrityError : Error {
    explicit IntegrityError(const std::string& m) : Error(ErrorKind::integrity, m) {}
};
struct SolverError : Error {
    explicit SolverError(const std::string& m) : Error(ErrorKind::solver, m) {}
};
struct LabelingError : Error {
    explicit LabelingError(const std::string& m) : Error(ErrorKind::labeling, m) {}
};
struct InternalError : Error {
    explicit InternalError(const std::string& m) : Error(ErrorKind::internal, m) {}
};

} // namespace edspin
