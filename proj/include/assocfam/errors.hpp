#pragma once

#include <stdexcept>
#include <string>

namespace assocfam {

enum class ErrorKind {
  RankDeficient,
  SphereViolation,
  NotRegular,
  JetOrderTooLow,
  ProjectionDrift,
  NotElliptic,
  OrderOutOfRange,
  NotCircular,
  AmbientTooSmall,
  HolonomyTooLarge,
  NotMinimal,
  FlagMismatch,
  GridMismatch,
  PreconditionFailed,
  NotOdd,
  NotEven,
  IntegrationFailed,
  SolveResidualTooLarge,
  AllSingular,
  NotSubstantial,
  NotUnitNorm,
  AnglesNotSorted,
  InvalidSpec,
  ConfigError,
};

const char* to_string(ErrorKind kind);

// Numerical gate or precondition failure raised by the geometry modules.
class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorKind kind, const std::string& what, int node = -1)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), node_(node) {}

  ErrorKind kind() const { return kind_; }
  // Offending grid node (row-major, u fastest) or -1.
  int node() const { return node_; }

 private:
  ErrorKind kind_;
  int node_;
};

}  // namespace assocfam
