#pragma once

#include <stdexcept>
#include <string>

namespace xalma {

// Error taxonomy. Every failure carries a short machine-greppable class
// string (see kind()) that the CLI prints as `error[<kind>]: <message>`.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// Tensor/op shape mismatch; message names the op and the offending shapes.
struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

// Math domain violation (log of a non-positive value, etc).
struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error("domain", m) {}
};

// Caller broke a documented precondition.
struct ContractError : Error {
  explicit ContractError(const std::string& m) : Error("contract", m) {}
};

// Bad configuration: unknown target layer, invalid hyperparameter,
// missing reference model, malformed config file.
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

// Unknown token or character outside the vocabulary.
struct VocabError : Error {
  explicit VocabError(const std::string& m) : Error("vocab", m) {}
};

// Sequence exceeds the model's position capacity.
struct CapacityError : Error {
  explicit CapacityError(const std::string& m) : Error("capacity", m) {}
};

// Illegal state transition (duplicate attach, detach of missing group).
struct StateError : Error {
  explicit StateError(const std::string& m) : Error("state", m) {}
};

// Language cannot be routed to a group.
struct RoutingError : Error {
  explicit RoutingError(const std::string& m) : Error("routing", m) {}
};

// Record-file parse failure; message carries the line number.
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("parse", m) {}
};

// Missing or unusable input data.
struct DataError : Error {
  explicit DataError(const std::string& m) : Error("data", m) {}
};

// Filesystem failure.
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};

// Corrupt or truncated checkpoint.
struct IntegrityError : Error {
  explicit IntegrityError(const std::string& m) : Error("integrity", m) {}
};

// Training-stage order violation.
struct SequencingError : Error {
  explicit SequencingError(const std::string& m) : Error("sequencing", m) {}
};

}  // namespace xalma
