#pragma once

#include <stdexcept>
#include <string>

namespace bcast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model file or in-memory model violates an invariant. `path()` names the
/// offending entry, e.g. "channel.inner[1]".
class ModelError : public Error {
 public:
  ModelError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A required field is absent or has the wrong JSON type.
class SchemaError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Conditioning on an observation whose probability is zero.
class ZeroProbabilityObservation : public Error {
 public:
  using Error::Error;
};

/// A belief atom (or tree branch) needed by a structured strategy is missing.
class UnknownAtom : public Error {
 public:
  using Error::Error;
};

/// An enumeration would exceed its configured size limit.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace bcast
