#include "crossdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crossdiff {

namespace {

void require_full_snapshots(const Trajectory& traj, const char* who) {
  if (!traj.mesh || traj.snapshots.size() !=
                        static_cast<size_t>(traj.time.N) + 1) {
    throw DomainError(std::string(who) +
                      ": insufficient data, need stride-1 snapshots");
  }
}

// mu = sum p_i u_i / sum u_i, guarded against 0/0; stays >= min_i d_i.
Vec mu_field(const ModelSpec& model, const Field& U) {
  const int Nh = static_cast<int>(U.values.cols());
  Vec mu(Nh);
  for (int n = 0; n < Nh; ++n) {
    const Vec X = U.values.col(n);
    const Vec A = eval_A(model, X);
    mu[n] = A.sum() / std::max(X.sum(), 1e-300);
  }
  return mu;
}

}  // namespace

DualityReport duality_check(const ModelSpec& model, const Trajectory& traj,
                            double tol) {
  require_full_snapshots(traj, "duality_check");
  const Mesh& mesh = *traj.mesh;
  const double tau = traj.time.tau();
  const int N = traj.time.N;

  DualityReport rep;
  rep.mu_min = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= N; ++k) {
    const Field& U = traj.snapshots[k];
    const Vec v = U.values.colwise().sum().transpose();
    const Vec mu = mu_field(model, U);
    rep.mu_min = std::min(rep.mu_min, mu.minCoeff());
    rep.lhs += tau * integrate(mesh, mu.cwiseProduct(v.cwiseAbs2()));
    rep.int_mu += tau * integrate(mesh, mu);
  }

  const Vec v0 = traj.snapshots[0].values.colwise().sum().transpose();
  NeumannLaplacian lap(mesh);
  rep.hminus1_v0 = hminus1_norm(mesh, lap, v0);
  const double v0bar = integrate(mesh, v0) / mesh.volume();
  const double rho = model.reaction.rho_max();
  rep.rhs = std::exp(2.0 * rho * traj.time.T) *
            (rep.hminus1_v0 * rep.hminus1_v0 + v0bar * v0bar * rep.int_mu);
  rep.ratio = rep.lhs / rep.rhs;
  rep.pass = rep.ratio <= 1.0 + tol;

  // M(R) table: for power laws, mu <= max_i (d_i + sum_j m_ij R^{s_j})
  // whenever sum u <= R (each coordinate is then at most R).
  for (double R = 1.0; R <= 16.0; R *= 2.0) {
    double m_of_r = 0.0;
    for (int i = 0; i < model.species(); ++i) {
      double pi_max = model.pressure.d[i];
      for (int j = 0; j < model.species(); ++j) {
        pi_max += model.pressure.interaction(i, j) *
                  std::pow(R, model.pressure.exponents[j]);
      }
      m_of_r = std::max(m_of_r, pi_max);
    }
    rep.m_of_r.emplace_back(R, m_of_r);
  }
  return rep;
}

double duality_sum(const Trajectory& traj) {
  if (traj.ledger.empty()) throw DomainError("duality_sum: empty ledger");
  return traj.ledger.back().duality_sum;
}

DualitySumCheck duality_sum_check(const Trajectory& coarse,
                                  const Trajectory& fine, double tol) {
  DualitySumCheck out;
  out.coarse = duality_sum(coarse);
  out.fine = duality_sum(fine);
  out.rel_change = std::abs(out.fine - out.coarse) /
                   std::max(std::abs(out.coarse), 1e-300);
  out.stable = out.rel_change <= tol;
  return out;
}

std::vector<EquiintRow> equiintegrability_profile(
    const ModelSpec& model, const Trajectory& traj,
    const std::vector<double>& thresholds) {
  require_full_snapshots(traj, "equiintegrability_profile");
  const Mesh& mesh = *traj.mesh;
  const double tau = traj.time.tau();

  std::vector<EquiintRow> table;
  table.reserve(thresholds.size());
  for (double R : thresholds) {
    EquiintRow row;
    row.threshold = R;
    for (int k = 1; k <= traj.time.N; ++k) {
      const Field& U = traj.snapshots[k];
      double tail_A = 0.0, tail_R = 0.0;
      for (int n = 0; n < mesh.num_nodes(); ++n) {
        const Vec X = U.values.col(n);
        if (X.lpNorm<Eigen::Infinity>() <= R) continue;
        tail_A += eval_A(model, X).lpNorm<Eigen::Infinity>();
        tail_R += eval_reaction(model, X).lpNorm<Eigen::Infinity>();
      }
      row.tail_A += tau * tail_A * mesh.cell_volume();
      row.tail_R += tau * tail_R * mesh.cell_volume();
    }
    table.push_back(row);
  }
  return table;
}

MassBoundCheck mass_bound_check(const ModelSpec& model,
                                const Trajectory& traj) {
  require_full_snapshots(traj, "mass_bound_check");
  const Mesh& mesh = *traj.mesh;
  const double tau = traj.time.tau();
  const double rho = model.reaction.rho_max();
  const double bound = std::pow(2.0, 2.0 * rho * traj.time.T) *
                       integrate_species(mesh, traj.snapshots[0]).sum();

  MassBoundCheck out;
  out.max_mass_ok = true;
  double reaction_sum = 0.0;
  for (int k = 0; k <= traj.time.N; ++k) {
    const Field& U = traj.snapshots[k];
    const double mass = integrate_species(mesh, U).sum();
    const double ratio = mass / std::max(bound, 1e-300);
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.worst_k = k;
    }
    if (mass > bound * (1.0 + 1e-10) + 1e-10) out.max_mass_ok = false;
    if (k == 0) continue;
    double defect = 0.0;  // int (rho U^k - R(U^k)), nonnegative under H2
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      const Vec X = U.values.col(n);
      defect += rho * X.sum() - eval_reaction(model, X).sum();
    }
    reaction_sum += tau * defect * mesh.cell_volume();
  }
  out.reaction_ok = reaction_sum <= bound * (1.0 + 1e-10) + 1e-10;
  return out;
}

std::vector<LedgerRow> recompute_ledger(const ModelSpec& model,
                                        const Trajectory& traj,
                                        double newton_tol) {
  require_full_snapshots(traj, "recompute_ledger");
  LedgerEngine engine(model, *traj.mesh, traj.time, newton_tol,
                      traj.snapshots[0]);
  std::vector<LedgerRow> rows;
  rows.reserve(traj.time.N);
  for (int k = 1; k <= traj.time.N; ++k) {
    rows.push_back(engine.advance(k, traj.snapshots[k - 1], traj.snapshots[k]));
  }
  return rows;
}

}  // namespace crossdiff
