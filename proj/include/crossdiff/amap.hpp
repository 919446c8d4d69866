#pragma once

#include "crossdiff/model.hpp"
#include "crossdiff/types.hpp"

namespace crossdiff {

struct InversionSettings {
  double tol = 1e-12;   // relative residual tolerance
  int max_iters = 200;
  double damping = 1.0; // initial step fraction, halved down to 2^-20
};

/// Solves A(X) = W for X >= 0. Coordinates with W_i = 0 are frozen to 0
/// (A preserves the orthant strata); the positive block is solved by
/// damped Newton in log coordinates, which keeps iterates positive
/// without projection.
Vec invert_A(const ModelSpec& model, const Vec& W,
             const InversionSettings& settings = {});

/// Jacobian of Phi(Y) = ln A(exp Y), i.e.
/// Diag(1/A(exp Y)) * DA(exp Y) * Diag(exp Y).
/// Components of Y must lie in [-700, 700].
Mat jacobian_logA(const ModelSpec& model, const Vec& Y);

}  // namespace crossdiff
