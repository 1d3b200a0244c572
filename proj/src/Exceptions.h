#ifndef MDIMPUTE_EXCEPTIONS_H
#define MDIMPUTE_EXCEPTIONS_H

#include <stdexcept>
#include <string>

namespace mdi {

// Base for all library errors. The C API maps subclasses onto status codes,
// the CLI maps them onto exit codes.
class MdiError : public std::runtime_error {
public:
    explicit MdiError(const std::string& message) : std::runtime_error(message) {}
};

// Bad input data: malformed CSV, range violations, arity mismatches.
class DataError : public MdiError {
public:
    explicit DataError(const std::string& message) : MdiError(message) {}
};

// Bad configuration: invalid parameters, unknown labels, schema mismatches.
class ConfigError : public MdiError {
public:
    explicit ConfigError(const std::string& message) : MdiError(message) {}
};

// Filesystem problems: unreadable or unwritable paths.
class IoError : public MdiError {
public:
    explicit IoError(const std::string& message) : MdiError(message) {}
};

// Numerical failure during model fitting (divergence, non-finite objective).
class NumericError : public MdiError {
public:
    explicit NumericError(const std::string& message) : MdiError(message) {}
};

}  // namespace mdi

#endif
