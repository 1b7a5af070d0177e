#pragma once

#include <stdexcept>
#include <string>

namespace zsc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input files (dataset, manifest, template pack).
class DataError : public Error {
 public:
  using Error::Error;
};

// Run configuration that cannot be executed against the given inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class ScorerError : public Error {
 public:
  enum class Kind {
    kInvalidQuery,  // query violates its own preconditions
    kUnreachable,   // transport failure, backend down
    kRejected,      // backend refused: over-length, boundary straddle
    kProtocol,      // malformed response or span tiling failure
  };

  ScorerError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace zsc
