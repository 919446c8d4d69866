#pragma once

#include <functional>
#include <optional>

#include "crossdiff/types.hpp"

namespace crossdiff {

/// Scalar nonlinearity q in C0(R+) with q' >= 0 on the open half-line.
/// Extension point for non-power-law pressures; the sampled structure
/// checks accept any such pair.
struct ScalarFn {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
};

ScalarFn power_fn(double s);

/// Pressure law p_i(X) = d_i + sum_j m_ij x_j^{s_j}.
struct PressureLaw {
  Vec d;            // diffusion floors, d_i > 0
  Mat interaction;  // m_ij >= 0
  Vec exponents;    // s_j > 0

  int species() const { return static_cast<int>(d.size()); }
  double q(int j, double z) const;
  double dq(int j, double z) const;
  void validate() const;
};

/// Reaction law r_i(X) = rho_i - sum_j c_ij x_j^{alpha_ij}, alpha_ij < 1.
struct ReactionLaw {
  Vec rho;
  Mat c;      // c_ij >= 0
  Mat alpha;  // 0 <= alpha_ij < 1

  int species() const { return static_cast<int>(rho.size()); }
  bool is_zero() const;
  /// rho of hypothesis H2: max_i rho_i clamped at 0.
  double rho_max() const;
  void validate() const;
};

/// Entropy H(X) = sum_i pi_i h_i(x_i) with h_i'' (z) = z^{s_i - 2}.
struct EntropySpec {
  Vec pi;  // positive weights
  Vec s;   // exponents of the matching pressure law
  Vec d;   // diffusion floors, enter the uniform lower bound f_i

  int species() const { return static_cast<int>(pi.size()); }
  double h(int i, double z) const;
  double dh(int i, double z) const;
  double ddh(int i, double z) const;
  /// f_i(x)^2 = d_i q_i'(x)/x = s_i d_i x^{s_i - 2}.
  double f_squared(int i, double x) const;
  void validate() const;
};

// Scalar entropy branches, h(1) = h'(1) = 0, h''(z) = z^{s-2}.
double entropy_h(double s, double z);
double entropy_dh(double s, double z);
double entropy_ddh(double s, double z);

struct ModelSpec {
  PressureLaw pressure;
  ReactionLaw reaction;
  std::optional<EntropySpec> entropy;

  int species() const { return pressure.species(); }
  void validate() const;
};

/// (p_i(X))_i, each component >= d_i. Requires X >= 0.
Vec eval_pressure(const ModelSpec& model, const Vec& X);

/// A(X) = (p_i(X) x_i)_i. Requires X >= 0.
Vec eval_A(const ModelSpec& model, const Vec& X);

/// Jacobian of A; requires X > 0 strictly.
Mat eval_DA(const ModelSpec& model, const Vec& X);

/// R(X) = (r_i(X) x_i)_i. Requires X >= 0.
Vec eval_reaction(const ModelSpec& model, const Vec& X);

/// Jacobian of R with the singular power guard: entries driven by a
/// coordinate below 1e-13 are zeroed (the residual keeps the exact value).
Mat eval_DR(const ModelSpec& model, const Vec& X);

double eval_entropy(const EntropySpec& spec, const Vec& X);
Vec eval_grad_entropy(const EntropySpec& spec, const Vec& X);
/// Diagonal of the (diagonal) Hessian of H.
Vec eval_hess_entropy(const EntropySpec& spec, const Vec& X);

/// Certified constant C with grad H(X) . R(X) <= C (1 + H(X)) for all
/// X >= 0, assembled from per-species one-dimensional suprema on a
/// log-spaced grid with the analytic asymptotes folded in.
double entropy_reaction_bound(const ModelSpec& model);

}  // namespace crossdiff
