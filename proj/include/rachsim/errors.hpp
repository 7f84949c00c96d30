#pragma once

#include <stdexcept>
#include <string>

namespace rachsim {

enum class ErrorKind {
  PastEvent,
  ZeroRange,
  InvalidParameter,
  UnsupportedLaw,
  IllegalTransition,
  InvalidPreamble,
  ModeNotEnabled,
  NegativeDuration,
  InvalidConfig,
  ZeroConsumption,
  RegionOverflow,
  NoPendingData,
  InstanceTooLarge,
  NonConvergence,
  IncompatibleConfig,
  Parse,
  Validation,
  Io,
  CapExceeded,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::PastEvent: return "PastEvent";
    case ErrorKind::ZeroRange: return "ZeroRange";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::UnsupportedLaw: return "UnsupportedLaw";
    case ErrorKind::IllegalTransition: return "IllegalTransition";
    case ErrorKind::InvalidPreamble: return "InvalidPreamble";
    case ErrorKind::ModeNotEnabled: return "ModeNotEnabled";
    case ErrorKind::NegativeDuration: return "NegativeDuration";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ZeroConsumption: return "ZeroConsumption";
    case ErrorKind::RegionOverflow: return "RegionOverflow";
    case ErrorKind::NoPendingData: return "NoPendingData";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::IncompatibleConfig: return "IncompatibleConfig";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::Io: return "Io";
    case ErrorKind::CapExceeded: return "CapExceeded";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Scenario/sweep file syntax error; line is 1-based in the source text.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& msg)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + msg), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// Semantic config error; key names the offending parameter.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& key, const std::string& msg)
      : Error(ErrorKind::Validation, key + ": " + msg), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace rachsim
