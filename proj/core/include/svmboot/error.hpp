#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svmboot {

enum class ErrorKind { input, config, convergence, numeric, io };

std::string_view to_string(ErrorKind kind) noexcept;

/// Base of every exception thrown by the library. `origin` names the module
/// that raised it (e.g. "solver") so the CLI can report it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string origin, const std::string& what)
      : std::runtime_error(what), kind_(kind), origin_(std::move(origin)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& origin() const noexcept { return origin_; }

 private:
  ErrorKind kind_;
  std::string origin_;
};

class InputError : public Error {
 public:
  InputError(std::string origin, const std::string& what)
      : Error(ErrorKind::input, std::move(origin), what) {}
};

/// Invalid configuration. `key` is the offending config key when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string origin, const std::string& what, std::string key = {})
      : Error(ErrorKind::config, std::move(origin), what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class NumericError : public Error {
 public:
  NumericError(std::string origin, const std::string& what)
      : Error(ErrorKind::numeric, std::move(origin), what) {}
};

/// Diagnostics of the last Newton iterate when the solver gives up.
struct ConvergenceDiagnostics {
  int iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double stationarity = 0.0;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(std::string origin, const std::string& what, ConvergenceDiagnostics diag)
      : Error(ErrorKind::convergence, std::move(origin), what), diag_(diag) {}
  const ConvergenceDiagnostics& diagnostics() const noexcept { return diag_; }

 private:
  ConvergenceDiagnostics diag_;
};

class IoError : public Error {
 public:
  IoError(std::string origin, const std::string& what)
      : Error(ErrorKind::io, std::move(origin), what) {}
};

}  // namespace svmboot
