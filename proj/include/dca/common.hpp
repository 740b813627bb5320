#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dca {

// Base error carrying a short machine-parsable class tag. The CLI prints
// the tag on exit so scripts can branch on failure kind.
class Error : public std::runtime_error {
public:
    Error(std::string error_class, const std::string& message)
        : std::runtime_error(message), class_(std::move(error_class)) {}

    const std::string& error_class() const { return class_; }

private:
    std::string class_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error("shape_error", message) {}
};

class GraphError : public Error {
public:
    explicit GraphError(const std::string& message) : Error("graph_error", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io_error", message) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& message) : Error("numerical_error", message) {}
};

// Image/checkpoint decoders report a code alongside the class so tests can
// distinguish malformed-header from truncation etc.
enum class FormatErrorCode {
    bad_magic,
    bad_header,
    bad_maxval,
    unsupported_scale,
    truncated,
    bad_version,
    shape_mismatch,
    missing_tensor,
};

class FormatError : public Error {
public:
    FormatError(FormatErrorCode code, const std::string& message)
        : Error("format_error", message), code_(code) {}

    FormatErrorCode code() const { return code_; }

private:
    FormatErrorCode code_;
};

// Checks for conditions that indicate caller bugs (bad shapes, bad args).
#define DCA_CHECK(cond, exc_type, msg)        \
    do {                                      \
        if (!(cond)) throw exc_type((msg));   \
    } while (0)

#define DCA_CHECK_FMT(cond, code, msg)                        \
    do {                                                      \
        if (!(cond)) throw ::dca::FormatError((code), (msg)); \
    } while (0)

// Thread-local switch: when false, ops do not record the autodiff graph.
bool grad_enabled();
void set_grad_enabled(bool enabled);

struct NoGradGuard {
    NoGradGuard() : previous_(grad_enabled()) { set_grad_enabled(false); }
    ~NoGradGuard() { set_grad_enabled(previous_); }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

// Optional NaN/Inf scan after every forward op. Off by default; tests that
// exercise the finite-output invariant switch it on.
bool finite_checks_enabled();
void set_finite_checks_enabled(bool enabled);

inline constexpr float kMinDepth = 1e-3f;  // meters; lower bound of valid ground truth

}  // namespace dca
