#pragma once

#include <functional>

#include "crossdiff/amap.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

namespace crossdiff {

struct TimeGrid {
  double T = 1.0;
  int N = 100;

  double tau() const { return T / N; }
};

/// Checks rho*tau < 1/2 and C*tau < 1/2 (C from the entropy-reaction
/// bound when the model carries an entropy); throws DomainError with the
/// maximal admissible tau in the message.
void validate_time_grid(const ModelSpec& model, const TimeGrid& time);

struct SolverSettings {
  double newton_tol = 1e-10;  // relative residual tolerance of the step
  int max_newton = 50;
  int max_picard = 500;
  InversionSettings inversion;
};

struct StepResult {
  Field U;         // U^k > 0 nodewise
  Field W;         // A(U^k)
  int newton_iters = 0;
  double residual = 0.0;
};

struct LedgerRow {
  int k = 0;
  double t = 0.0;
  Vec mass;                    // per-species integral of U^k
  double entropy = 0.0;        // int H(U^k)
  double tau_dissipation = 0.0;
  double duality_sum = 0.0;    // running sum_k tau int (sum u)(sum A)
  double min_u = 0.0;
  double max_R_inf = 0.0;
  int newton_iters = 0;
  bool entropy_checked = false;
  bool mass_identity_ok = true;
  bool mass_growth_ok = true;
  bool entropy_step_ok = true;
  bool entropy_sum_ok = true;
  bool positivity_ok = true;

  bool all_ok() const {
    return mass_identity_ok && mass_growth_ok && entropy_step_ok &&
           entropy_sum_ok && positivity_ok;
  }
};

struct Trajectory {
  const Mesh* mesh = nullptr;
  TimeGrid time;
  int snapshot_stride = 1;
  std::vector<Field> snapshots;      // snapshots[0] = U^0_N
  std::vector<int> snapshot_steps;
  std::vector<LedgerRow> ledger;     // one row per step k = 1..N
  double entropy_bound = 0.0;        // C of the entropy-reaction bound
  bool entropy_available = false;
};

/// Produces the per-step ledger rows. Pure function of the snapshot
/// sequence: replaying the same fields reproduces the rows bit-exactly
/// (newton_iters is filled in by the caller).
class LedgerEngine {
 public:
  LedgerEngine(const ModelSpec& model, const Mesh& mesh, const TimeGrid& time,
               double newton_tol, const Field& U0);
  LedgerRow advance(int k, const Field& U_prev, const Field& U_cur);
  double entropy_bound() const { return C_; }
  bool entropy_available() const { return entropy_available_; }

 private:
  const ModelSpec& model_;
  const Mesh& mesh_;
  TimeGrid time_;
  bool entropy_available_ = false;
  double C_ = 0.0;
  double newton_tol_ = 0.0;
  double eps_solver_ = 0.0;
  double total_mass0_ = 0.0;
  double growth_factor_ = 1.0;
  double entropy_prev_ = 0.0;
  double summed_bound_ = 0.0;
  double diss_sum_ = 0.0;
  double duality_sum_ = 0.0;
};

struct RunSinks {
  std::function<void(int, const Field&)> on_snapshot;
  std::function<void(const LedgerRow&)> on_row;
};

struct RunSettings {
  SolverSettings solver;
  int snapshot_stride = 1;
  bool strict = false;
};

/// U^0_N = max(U_in, 1/N), then a per-species rescale back toward the
/// input mass when the clamp added more, never going below the floor.
Field prepare_initial(const Mesh& mesh, const Field& U_in, int N);

/// One implicit step: solves A^-1(W) - tau L W - tau R(A^-1(W)) = U_prev
/// in W by damped Newton with a Picard fallback.
StepResult step(const ModelSpec& model, const Mesh& mesh,
                const NeumannLaplacian& lap, const Field& U_prev, double tau,
                const SolverSettings& settings = {});

/// Full time loop with the per-step diagnostics ledger.
Trajectory run(const ModelSpec& model, const Mesh& mesh, const TimeGrid& time,
               const Field& U_in, const RunSettings& settings = {},
               const RunSinks& sinks = {});

/// int_Omega H(U) by midpoint quadrature.
double integrate_entropy(const Mesh& mesh, const EntropySpec& spec,
                         const Field& U);

}  // namespace crossdiff
