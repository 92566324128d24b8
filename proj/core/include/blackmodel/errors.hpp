#ifndef BLACKMODEL_ERRORS_HPP
#define BLACKMODEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace blackmodel {

// Base class for all library errors. `kind()` is a stable machine-parsable
// tag used by the CLI to map errors onto exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& msg)
        : Error("parse", "line " + std::to_string(line) + ", col " +
                             std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error("validation", msg) {}
};

class UnknownMachine : public Error {
public:
    explicit UnknownMachine(const std::string& name)
        : Error("unknown-machine", "unknown machine: " + name) {}
};

// A requested calibration cell does not exist. `reason()` distinguishes
// precisions introduced by the newer generation ("new-in-Blackwell") from
// plain holes in the calibration data.
class MissingCalibration : public Error {
public:
    MissingCalibration(const std::string& what, std::string reason = "not-calibrated")
        : Error("missing-calibration", what + ": " + reason), reason_(std::move(reason)) {}
    const std::string& reason() const { return reason_; }

private:
    std::string reason_;
};

class Unsupported : public Error {
public:
    explicit Unsupported(const std::string& msg) : Error("unsupported", msg) {}
};

class NoTmem : public Error {
public:
    explicit NoTmem(const std::string& machine)
        : Error("no-tmem", machine + " has no tensor memory") {}
};

class TmemOverflow : public Error {
public:
    explicit TmemOverflow(const std::string& msg) : Error("tmem-overflow", msg) {}
};

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& msg) : Error("shape-mismatch", msg) {}
};

class InvalidCode : public Error {
public:
    explicit InvalidCode(const std::string& msg) : Error("invalid-code", msg) {}
};

class UnknownFormat : public Error {
public:
    explicit UnknownFormat(const std::string& name)
        : Error("unknown-format", "unknown format: " + name) {}
};

class UnknownChunk : public Error {
public:
    explicit UnknownChunk(const std::string& msg) : Error("unknown-chunk", msg) {}
};

class IllConditioned : public Error {
public:
    explicit IllConditioned(const std::string& msg) : Error("ill-conditioned", msg) {}
};

class EmptyComparison : public Error {
public:
    explicit EmptyComparison(const std::string& msg) : Error("empty-comparison", msg) {}
};

} // namespace blackmodel

#endif
