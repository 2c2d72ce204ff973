#pragma once

#include <stdexcept>
#include <string>

namespace valforge {

/// Caller passed arguments that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical self-check failed (asymmetric Hessian, failed fit, ...).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A support function failed the positive-curvature certificate.
class ConvexityViolation : public std::runtime_error {
 public:
  ConvexityViolation(const std::string& what, std::size_t node, double eigenvalue)
      : std::runtime_error(what), node_(node), eigenvalue_(eigenvalue) {}

  std::size_t node() const { return node_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  std::size_t node_;
  double eigenvalue_;
};

/// Restricted Hessians of an ellipsoid family fail to span at some node.
class SpanningFailure : public std::runtime_error {
 public:
  SpanningFailure(const std::string& what, std::size_t node, double sigma)
      : std::runtime_error(what), node_(node), sigma_(sigma) {}

  std::size_t node() const { return node_; }
  double sigma() const { return sigma_; }

 private:
  std::size_t node_;
  double sigma_;
};

/// Kernel could not be reproduced by the truncated harmonic expansion.
class ReconstructionFailure : public std::runtime_error {
 public:
  ReconstructionFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace valforge
