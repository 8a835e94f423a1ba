#pragma once

#include <stdexcept>
#include <string>

namespace hplan {

/// Bad arguments to a numerical routine (precondition violation).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cartesian/Frenet transformation failures.
class GeometryError : public std::runtime_error {
 public:
  enum class Kind { OutOfPath, Singularity, DegeneratePath };

  GeometryError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Scenario or config documents that do not match the expected layout.
/// `field` names the offending key path (e.g. "goal.s_range").
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Environment used out of order (e.g. stepping a terminated episode).
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical blow-up during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hplan
