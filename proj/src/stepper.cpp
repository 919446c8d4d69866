#include "crossdiff/stepper.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crossdiff {

namespace {

// DA on the closed orthant (same expression as eval_DA, no positivity guard;
// the boundary formula matches the stratum-restricted Jacobian).
Mat closed_DA(const ModelSpec& model, const Vec& X) {
  const int I = model.species();
  const PressureLaw& p = model.pressure;
  Vec qx(I);
  for (int j = 0; j < I; ++j) qx[j] = p.q(j, X[j]);
  const Vec press = p.d + p.interaction * qx;
  Mat J(I, I);
  for (int j = 0; j < I; ++j) {
    const double dq = X[j] > 0.0 ? p.dq(j, X[j]) : 0.0;
    for (int i = 0; i < I; ++i) J(i, j) = p.interaction(i, j) * X[i] * dq;
  }
  J.diagonal() += press;
  return J;
}

}  // namespace

void validate_time_grid(const ModelSpec& model, const TimeGrid& time) {
  if (time.N < 1 || !(time.T > 0.0))
    throw DomainError("TimeGrid: need N >= 1 and T > 0");
  const double tau = time.tau();
  const double rho = model.reaction.rho_max();
  if (rho > 0.0 && rho * tau >= 0.5) {
    std::ostringstream msg;
    msg << "TimeGrid: rho*tau = " << rho * tau
        << " >= 1/2; reduce tau below " << 0.5 / rho << " (increase N beyond "
        << static_cast<long>(std::ceil(time.T * rho / 0.5)) << ")";
    throw DomainError(msg.str());
  }
  if (model.entropy && !model.reaction.is_zero()) {
    const double C = entropy_reaction_bound(model);
    if (C > 0.0 && C * tau >= 0.5) {
      std::ostringstream msg;
      msg << "TimeGrid: C*tau = " << C * tau
          << " >= 1/2 for the entropy-reaction constant C = " << C
          << "; reduce tau below " << 0.5 / C;
      throw DomainError(msg.str());
    }
  }
}

Field prepare_initial(const Mesh& mesh, const Field& U_in, int N) {
  if (U_in.mesh != &mesh) throw DomainError("prepare_initial: mesh mismatch");
  if ((U_in.values.array() < 0.0).any())
    throw DomainError("prepare_initial: negative initial data");
  if (N < 1) throw DomainError("prepare_initial: N must be >= 1");

  const double floor = 1.0 / N;
  Field out = U_in;
  out.values = out.values.cwiseMax(floor);
  for (int i = 0; i < out.species(); ++i) {
    const double target = integrate(mesh, U_in.values.row(i).transpose());
    const double clamped = integrate(mesh, out.values.row(i).transpose());
    if (clamped > target) {
      const double lambda = target / clamped;
      out.values.row(i) = (lambda * out.values.row(i)).cwiseMax(floor);
    }
  }
  return out;
}

StepResult step(const ModelSpec& model, const Mesh& mesh,
                const NeumannLaplacian& lap, const Field& U_prev, double tau,
                const SolverSettings& settings) {
  if (U_prev.mesh != &mesh) throw DomainError("step: mesh mismatch");
  const int I = model.species();
  const int Nh = mesh.num_nodes();
  const int M = I * Nh;  // species-major unknown layout

  InversionSettings inv = settings.inversion;
  inv.tol = std::min(inv.tol, std::max(settings.newton_tol * 0.01, 5e-16));

  const double target =
      settings.newton_tol *
      (1.0 + U_prev.values.lpNorm<Eigen::Infinity>());

  Vec uprev(M);
  for (int s = 0; s < I; ++s)
    uprev.segment(s * Nh, Nh) = U_prev.values.row(s).transpose();

  // unknown W = A(U), started from A(U_prev)
  Vec W(M);
  for (int n = 0; n < Nh; ++n) {
    const Vec An = eval_A(model, U_prev.values.col(n));
    for (int s = 0; s < I; ++s) W[s * Nh + n] = An[s];
  }

  Mat U(I, Nh);  // current A^-1(W), nodewise
  auto residual = [&](const Vec& w, Mat& u) {
    Vec G(M);
    for (int n = 0; n < Nh; ++n) {
      Vec wn(I);
      for (int s = 0; s < I; ++s) wn[s] = w[s * Nh + n];
      u.col(n) = invert_A(model, wn, inv);
    }
    for (int s = 0; s < I; ++s) {
      G.segment(s * Nh, Nh) =
          u.row(s).transpose() - tau * (lap.L * w.segment(s * Nh, Nh));
    }
    for (int n = 0; n < Nh; ++n) {
      const Vec Rn = eval_reaction(model, u.col(n));
      for (int s = 0; s < I; ++s) G[s * Nh + n] -= tau * Rn[s];
    }
    G -= uprev;
    return G;
  };

  Vec G = residual(W, U);
  double gnorm = G.lpNorm<Eigen::Infinity>();

  const bool has_reaction = !model.reaction.is_zero();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseLU<SpMat> lu;
  SpMat J(M, M);
  Mat Utrial(I, Nh);

  constexpr double kLambdaFloor = 1.0 / (1 << 20);
  int iters = 0;
  int stalls = 0;

  auto line_search = [&](const Vec& delta) -> bool {
    // returns false when positivity of W is lost even at the floor step
    double lambda = 1.0;
    while (true) {
      Vec Wtrial = W + lambda * delta;
      const bool admissible = (Wtrial.array() >= 0.0).all();
      if (admissible) {
        Vec Gtrial = residual(Wtrial, Utrial);
        const double gtrial = Gtrial.lpNorm<Eigen::Infinity>();
        if (gtrial < gnorm || lambda <= kLambdaFloor) {
          stalls = gtrial < gnorm ? 0 : stalls + 1;
          W = std::move(Wtrial);
          G = std::move(Gtrial);
          gnorm = gtrial;
          U = Utrial;
          return true;
        }
      } else if (lambda <= kLambdaFloor) {
        return false;
      }
      lambda *= 0.5;
    }
  };

  for (; iters < settings.max_newton && gnorm > target; ++iters) {
    trip.clear();
    for (int n = 0; n < Nh; ++n) {
      const Mat B = closed_DA(model, U.col(n)).inverse();
      Mat K = B;
      if (has_reaction) K -= tau * (eval_DR(model, U.col(n)) * B);
      for (int s = 0; s < I; ++s)
        for (int s2 = 0; s2 < I; ++s2)
          trip.emplace_back(s * Nh + n, s2 * Nh + n, K(s, s2));
    }
    for (int s = 0; s < I; ++s) {
      for (int col = 0; col < lap.L.outerSize(); ++col) {
        for (SpMat::InnerIterator it(lap.L, col); it; ++it) {
          trip.emplace_back(s * Nh + it.row(), s * Nh + it.col(),
                            -tau * it.value());
        }
      }
    }
    J.setFromTriplets(trip.begin(), trip.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw ConvergenceError("step: singular Newton system", gnorm);
    const Vec delta = lu.solve(-G);
    if (!line_search(delta))
      throw ConvergenceError("step: lost positivity of W at the damping floor",
                             gnorm);
    if (stalls >= 3) break;  // hand over to Picard
  }

  if (gnorm > target) {
    // Picard fallback: frozen symmetric operator (Id/alpha - tau L) per
    // species, damped residual correction
    const double alpha = model.pressure.d.minCoeff();
    SpMat Mp(M, M);
    trip.clear();
    for (int s = 0; s < I; ++s) {
      for (int col = 0; col < lap.L.outerSize(); ++col) {
        for (SpMat::InnerIterator it(lap.L, col); it; ++it) {
          trip.emplace_back(s * Nh + it.row(), s * Nh + it.col(),
                            -tau * it.value());
        }
      }
      for (int n = 0; n < Nh; ++n)
        trip.emplace_back(s * Nh + n, s * Nh + n, 1.0 / alpha);
    }
    Mp.setFromTriplets(trip.begin(), trip.end());
    lu.compute(Mp);
    if (lu.info() != Eigen::Success)
      throw ConvergenceError("step: Picard operator factorization failed",
                             gnorm);
    for (int m = 0; m < settings.max_picard && gnorm > target; ++m) {
      const Vec delta = lu.solve(-G);
      if (!line_search(delta))
        throw ConvergenceError(
            "step: lost positivity of W at the damping floor", gnorm);
      ++iters;
    }
  }

  if (gnorm > target)
    throw ConvergenceError("step: no convergence, residual " +
                               std::to_string(gnorm),
                           gnorm);

  StepResult out;
  out.U = Field(mesh, I);
  out.W = Field(mesh, I);
  out.U.values = U;
  for (int s = 0; s < I; ++s)
    out.W.values.row(s) = W.segment(s * Nh, Nh).transpose();
  out.newton_iters = iters;
  out.residual = gnorm;
  return out;
}

double integrate_entropy(const Mesh& mesh, const EntropySpec& spec,
                         const Field& U) {
  if (U.mesh != &mesh) throw DomainError("integrate_entropy: mesh mismatch");
  double total = 0.0;
  for (int n = 0; n < mesh.num_nodes(); ++n)
    total += eval_entropy(spec, U.values.col(n));
  return total * mesh.cell_volume();
}

LedgerEngine::LedgerEngine(const ModelSpec& model, const Mesh& mesh,
                           const TimeGrid& time, double newton_tol,
                           const Field& U0)
    : model_(model), mesh_(mesh), time_(time) {
  entropy_available_ = model.entropy.has_value();
  C_ = entropy_available_ ? entropy_reaction_bound(model) : 0.0;
  newton_tol_ = newton_tol;
  eps_solver_ = 10.0 * newton_tol * mesh.num_nodes();
  total_mass0_ = integrate_species(mesh, U0).sum();
  growth_factor_ = std::pow(2.0, 2.0 * model.reaction.rho_max() * time.T);
  if (entropy_available_) {
    entropy_prev_ = integrate_entropy(mesh, *model.entropy, U0);
  }
  summed_bound_ = (1.0 + std::exp(2.0 * C_ * time.T)) *
                  (C_ * time.T + entropy_prev_);
}

LedgerRow LedgerEngine::advance(int k, const Field& U_prev,
                                const Field& U_cur) {
  const int I = model_.species();
  const double tau = time_.tau();
  LedgerRow row;
  row.k = k;
  row.t = k * tau;
  row.mass = integrate_species(mesh_, U_cur);
  row.min_u = U_cur.values.minCoeff();
  row.positivity_ok = row.min_u > 0.0;

  // per-step mass identity, exact discrete integration of the scheme
  const Vec mass_prev = integrate_species(mesh_, U_prev);
  Vec reaction_mass = Vec::Zero(I);
  double max_R_inf = 0.0;
  for (int n = 0; n < mesh_.num_nodes(); ++n) {
    const Vec Rn = eval_reaction(model_, U_cur.values.col(n));
    reaction_mass += Rn;
    max_R_inf = std::max(max_R_inf, Rn.lpNorm<Eigen::Infinity>());
  }
  reaction_mass *= mesh_.cell_volume();
  row.max_R_inf = max_R_inf;
  row.mass_identity_ok = true;
  // The discrete identity is exact up to the nonlinear-solve residual
  // integrated over the domain.
  const double mass_tol =
      std::max(1e-12, newton_tol_ * (1.0 + U_cur.values.maxCoeff()) *
                          mesh_.volume());
  for (int i = 0; i < I; ++i) {
    const double drift =
        std::abs(row.mass[i] - mass_prev[i] - tau * reaction_mass[i]);
    if (drift > mass_tol * std::max(1.0, std::abs(row.mass[i])))
      row.mass_identity_ok = false;
  }
  row.mass_growth_ok =
      row.mass.sum() <= growth_factor_ * total_mass0_ * (1.0 + 1e-10) + 1e-10;

  double sum_uA = 0.0;
  for (int n = 0; n < mesh_.num_nodes(); ++n) {
    const Vec An = eval_A(model_, U_cur.values.col(n));
    sum_uA += U_cur.values.col(n).sum() * An.sum();
  }
  duality_sum_ += tau * sum_uA * mesh_.cell_volume();
  row.duality_sum = duality_sum_;

  if (entropy_available_) {
    row.entropy_checked = true;
    row.entropy = integrate_entropy(mesh_, *model_.entropy, U_cur);
    row.tau_dissipation =
        tau * dissipation(mesh_, model_, *model_.entropy, U_cur);
    row.entropy_step_ok = row.entropy - entropy_prev_ + row.tau_dissipation <=
                          C_ * tau * (1.0 + row.entropy) + eps_solver_;
    diss_sum_ += row.tau_dissipation;
    row.entropy_sum_ok =
        row.entropy + diss_sum_ <= summed_bound_ + k * eps_solver_;
    entropy_prev_ = row.entropy;
  }
  return row;
}

Trajectory run(const ModelSpec& model, const Mesh& mesh, const TimeGrid& time,
               const Field& U_in, const RunSettings& settings,
               const RunSinks& sinks) {
  model.validate();
  validate_time_grid(model, time);
  NeumannLaplacian lap(mesh);
  Field U = prepare_initial(mesh, U_in, time.N);

  Trajectory traj;
  traj.mesh = &mesh;
  traj.time = time;
  traj.snapshot_stride = settings.snapshot_stride;
  traj.entropy_available = model.entropy.has_value();
  traj.snapshots.push_back(U);
  traj.snapshot_steps.push_back(0);
  if (sinks.on_snapshot) sinks.on_snapshot(0, U);

  LedgerEngine engine(model, mesh, time, settings.solver.newton_tol, U);
  traj.entropy_bound = engine.entropy_bound();

  for (int k = 1; k <= time.N; ++k) {
    StepResult sr = step(model, mesh, lap, U, time.tau(), settings.solver);
    LedgerRow row = engine.advance(k, U, sr.U);
    row.newton_iters = sr.newton_iters;

    if (settings.strict && !row.all_ok()) {
      std::ostringstream msg;
      msg << "diagnostic violation at step " << k << ":";
      if (!row.positivity_ok) msg << " positivity";
      if (!row.mass_identity_ok) msg << " mass-identity";
      if (!row.mass_growth_ok) msg << " mass-growth";
      if (!row.entropy_step_ok) msg << " entropy-step";
      if (!row.entropy_sum_ok) msg << " entropy-sum";
      traj.ledger.push_back(row);
      throw DiagnosticViolation(msg.str());
    }

    traj.ledger.push_back(row);
    if (sinks.on_row) sinks.on_row(row);
    U = std::move(sr.U);
    if (k % settings.snapshot_stride == 0 || k == time.N) {
      traj.snapshots.push_back(U);
      traj.snapshot_steps.push_back(k);
      if (sinks.on_snapshot) sinks.on_snapshot(k, U);
    }
  }
  return traj;
}

}  // namespace crossdiff
