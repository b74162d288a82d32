#pragma once

#include <stdexcept>
#include <string>

namespace flowhiql {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values (bad flags, out-of-range hyperparameters).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Structural mismatch: dimensions, layouts, unknown config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Non-finite value encountered; `segment` names the parameter segment (or
// computation) the value was traced to.
class NumericError : public Error {
 public:
  NumericError(std::string segment, const std::string& what)
      : Error(what + " [" + segment + "]"), segment_(std::move(segment)) {}
  const std::string& segment() const { return segment_; }

 private:
  std::string segment_;
};

}  // namespace flowhiql
