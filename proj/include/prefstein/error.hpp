#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prefstein {

// Base of every error the toolkit raises. `kind()` is the stable name used in
// the CLI's machine-readable error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ParamOutOfRange : public Error {
public:
    explicit ParamOutOfRange(const std::string& what) : Error("ParamOutOfRange", what) {}
};

// f(k) <= 0 or f(k) > max{k+1-d0, 1}.
class ViolationAt : public Error {
public:
    ViolationAt(std::size_t k, const std::string& what) : Error("ViolationAt", what), k_(k) {}
    std::size_t k() const noexcept { return k_; }

private:
    std::size_t k_;
};

class TruncationFailure : public Error {
public:
    explicit TruncationFailure(const std::string& what) : Error("TruncationFailure", what) {}
};

class ToleranceNotMet : public Error {
public:
    explicit ToleranceNotMet(const std::string& what) : Error("ToleranceNotMet", what) {}
};

class RegimeMismatch : public Error {
public:
    explicit RegimeMismatch(const std::string& what) : Error("RegimeMismatch", what) {}
};

class NotApplicable : public Error {
public:
    explicit NotApplicable(const std::string& what) : Error("NotApplicable", what) {}
};

class TailUnderflow : public Error {
public:
    TailUnderflow(std::size_t k, const std::string& what) : Error("TailUnderflow", what), k_(k) {}
    std::size_t k() const noexcept { return k_; }

private:
    std::size_t k_;
};

class NotUnimodal : public Error {
public:
    NotUnimodal(std::size_t row, const std::string& what) : Error("NotUnimodal", what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class PropertyViolation : public Error {
public:
    PropertyViolation(std::string which, std::size_t k, std::size_t row, const std::string& what)
        : Error("PropertyViolation", what), which_(std::move(which)), k_(k), row_(row) {}
    const std::string& which() const noexcept { return which_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t row() const noexcept { return row_; }

private:
    std::string which_;
    std::size_t k_;
    std::size_t row_;
};

// Malformed configuration or rule descriptor; `field` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("ConfigError", what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace prefstein
