#pragma once

#include "crossdiff/stepper.hpp"

namespace crossdiff {

struct DualityReport {
  double lhs = 0.0;         // discrete int_{Q_T} mu v^2
  double rhs = 0.0;         // e^{2 rho T}(||v0 - v0bar||^2_{H-1} + v0bar^2 int mu)
  double ratio = 0.0;
  double hminus1_v0 = 0.0;
  double int_mu = 0.0;      // discrete int_{Q_T} mu
  double mu_min = 0.0;      // >= min_i d_i everywhere
  bool pass = false;
  // (R, M(R)) with M(R) an upper bound for sup of mu over {sum u <= R}
  std::vector<std::pair<double, double>> m_of_r;
};

/// Parabolic duality L^2(Q_T) estimate on the discrete trajectory. Needs
/// stride-1 snapshots; tolerance absorbs the time-quadrature error of the
/// step-in-time trajectory.
DualityReport duality_check(const ModelSpec& model, const Trajectory& traj,
                            double tol = 0.05);

struct DualitySumCheck {
  double coarse = 0.0;
  double fine = 0.0;
  double rel_change = 0.0;
  bool stable = false;  // change <= tol under halving tau at fixed T
};

/// Final value of the running duality sum sum_k tau int (sum u)(sum A).
double duality_sum(const Trajectory& traj);

/// Refinement-stability surrogate for the boundedness of the sum.
DualitySumCheck duality_sum_check(const Trajectory& coarse,
                                  const Trajectory& fine, double tol = 0.20);

struct EquiintRow {
  double threshold = 0.0;
  double tail_A = 0.0;  // int ||A(U)||_inf 1_{||U||_inf > R}
  double tail_R = 0.0;  // int ||R(U)||_inf 1_{||U||_inf > R}
};

/// Tail-integral table over Q_T; monotone nonincreasing in the threshold
/// and dominated by duality_sum / R. Needs stride-1 snapshots.
std::vector<EquiintRow> equiintegrability_profile(
    const ModelSpec& model, const Trajectory& traj,
    const std::vector<double>& thresholds);

struct MassBoundCheck {
  bool max_mass_ok = false;   // max_k int U^k <= 2^{2 rho tau N} int U^0
  bool reaction_ok = false;   // sum_k tau int (rho U^k - R(U^k)) <= same bound
  double max_ratio = 0.0;
  int worst_k = 0;
};

MassBoundCheck mass_bound_check(const ModelSpec& model,
                                const Trajectory& traj);

/// Replays the ledger from stored snapshots; with stride-1 snapshots the
/// rows reproduce the originals bit-exactly (except newton_iters).
std::vector<LedgerRow> recompute_ledger(const ModelSpec& model,
                                        const Trajectory& traj,
                                        double newton_tol);

}  // namespace crossdiff
