#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace repack {

// Error hierarchy shared by all modules. Each class carries a stable
// machine-parsable code; the CLI maps codes to exit status.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// File could not be opened, read or written.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("E_IO", what) {}
};

// On-disk bytes do not form a valid RPK1/RPKM payload.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("E_FORMAT", what) {}
};

// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("E_VALIDATION", what) {}
};

class ShapeError : public ValidationError {
public:
    explicit ShapeError(const std::string& what) : ValidationError(what) {}
};

class RangeError : public ValidationError {
public:
    explicit RangeError(const std::string& what) : ValidationError(what) {}
};

// Training produced a non-finite loss; carries the step it happened at.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : Error("E_DIVERGENCE", what + " (step " + std::to_string(step) + ")"),
          step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace repack
