#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace srpg {

// Base of every error thrown by the library. `code()` is a stable,
// machine-readable identifier; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation_error", message) {}
};

// Raised by validate_schema. Codes: parse_error, unknown_key, missing_key,
// limit_exceeded, invalid_value.
class SchemaError : public Error {
 public:
  SchemaError(std::string code, const std::string& message,
              std::optional<std::size_t> position = std::nullopt)
      : Error(std::move(code), message), position_(position) {}

  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  std::optional<std::size_t> position_;
};

// Surfaced by a guard that cannot produce a safe output (fail-closed).
class GuardError : public Error {
 public:
  explicit GuardError(const std::string& message, std::string code = "guard_error")
      : Error(std::move(code), message) {}
};

// The fused output still contains a detected identifier of the raw input.
class GuardIntegrityError : public GuardError {
 public:
  explicit GuardIntegrityError(const std::string& message)
      : GuardError(message, "guard_integrity") {}
};

}  // namespace srpg
