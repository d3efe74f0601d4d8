#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace piconsensus {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GraphErrorKind {
  TooFewNodes,
  IndexOutOfRange,
  SelfLoop,
  NonPositiveWeight,
  DuplicateEdge,
  NotStronglyConnected,
  NonFinite,
};

class GraphError : public Error {
 public:
  GraphError(GraphErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  GraphErrorKind kind() const noexcept { return kind_; }

 private:
  GraphErrorKind kind_;
};

enum class ExprErrorKind {
  Lexical,
  Syntax,
  UnknownIdentifier,
  UnknownFunction,
  UnboundVariable,
};

/// Expression parse or evaluation failure. `position()` is a 0-based byte
/// offset into the source, or npos when not applicable.
class ExprError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ExprError(ExprErrorKind kind, const std::string& what, std::size_t position = npos)
      : Error(what), kind_(kind), position_(position) {}
  ExprErrorKind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

 private:
  ExprErrorKind kind_;
  std::size_t position_;
};

/// A precondition on dimensions or parameter ranges was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A rate or state became non-finite or crossed the overflow guard.
/// `agent()` is 0-based, or npos when the offending entry is not agent-specific.
class DivergenceError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DivergenceError(const std::string& what, std::size_t agent = npos, double time = 0.0)
      : Error(what), agent_(agent), time_(time) {}
  std::size_t agent() const noexcept { return agent_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t agent_;
  double time_;
};

/// Scenario document failed to parse or validate. Carries every issue found.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace piconsensus
