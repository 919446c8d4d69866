#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>
#include <vector>

namespace crossdiff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Input outside the admissible domain (negative density, bad exponent, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative solve did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The model lacks the entropy structure required by the operation.
class StructureError : public std::runtime_error {
 public:
  explicit StructureError(const std::string& what,
                          std::vector<int> cycle = {})
      : std::runtime_error(what), cycle_(std::move(cycle)) {}
  const std::vector<int>& violated_cycle() const { return cycle_; }

 private:
  std::vector<int> cycle_;
};

/// A runtime-checked a priori estimate failed in strict mode.
class DiagnosticViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crossdiff
