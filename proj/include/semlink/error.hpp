#ifndef SEMLINK_ERROR_HPP
#define SEMLINK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace semlink {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid numeric argument (counts, dB values, probabilities).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class DecodingError : public Error {
 public:
  using Error::Error;
};

/// Shape or value problem inside the analysis/synthesis path.
class CodecError : public Error {
 public:
  using Error::Error;
};

class ToolError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario configuration or corpus spec.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A scripted oracle has no record for the requested (trigger, step).
class OracleGapError : public Error {
 public:
  OracleGapError(std::string trigger, long step)
      : Error("oracle script has no '" + trigger + "' entry for step " + std::to_string(step)),
        trigger_(std::move(trigger)),
        step_(step) {}

  const std::string& trigger() const noexcept { return trigger_; }
  long step() const noexcept { return step_; }

 private:
  std::string trigger_;
  long step_;
};

}  // namespace semlink

#endif  // SEMLINK_ERROR_HPP
