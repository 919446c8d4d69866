#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/structure.hpp"

using namespace crossdiff;

namespace {

ModelSpec make_model(Vec d, Mat m, Vec s) {
  ModelSpec model;
  model.pressure.d = std::move(d);
  model.pressure.interaction = std::move(m);
  model.pressure.exponents = std::move(s);
  const int I = model.pressure.species();
  model.reaction.rho = Vec::Zero(I);
  model.reaction.c = Mat::Zero(I, I);
  model.reaction.alpha = Mat::Zero(I, I);
  return model;
}

ModelSpec skt_model() {
  ModelSpec m = make_model(Vec(Vec::Ones(2)), Mat(Mat::Ones(2, 2)),
                           Vec(Vec::Ones(2)));
  m.entropy = build_entropy(m);
  return m;
}

Field gaussian_field(const Mesh& mesh, int species) {
  Field U(mesh, species);
  for (int i = 0; i < species; ++i) {
    const double c = 0.3 + 0.4 * i;
    for (int node = 0; node < mesh.num_nodes(); ++node) {
      const double x = mesh.coordinate(node, 0);
      U.values(i, node) =
          0.2 + std::exp(-(x - c) * (x - c) / (2 * 0.08 * 0.08));
    }
  }
  return U;
}

Trajectory benchmark_run(const ModelSpec& m, const Mesh& mesh, double T,
                         int N, int stride = 1) {
  Field U = gaussian_field(mesh, m.species());
  RunSettings settings;
  settings.snapshot_stride = stride;
  return run(m, mesh, TimeGrid{T, N}, U, settings);
}

}  // namespace

TEST_CASE("duality bound on an equilibrium trajectory") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 32);
  Field U(mesh, 2);
  U.values.setConstant(1.0);
  const Trajectory traj = run(m, mesh, TimeGrid{0.1, 20}, U);
  const DualityReport rep = duality_check(m, traj);
  CHECK(rep.pass);
  CHECK(rep.hminus1_v0 <= 1e-10);
  CHECK(rep.mu_min >= m.pressure.d.minCoeff() - 1e-12);
}

TEST_CASE("duality bound on the pure heat model with unit weight") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Zero(1, 1), Vec::Ones(1));
  const Mesh mesh = Mesh::line(1.0, 64);
  const Trajectory traj = benchmark_run(m, mesh, 0.2, 50);
  const DualityReport rep = duality_check(m, traj);
  CHECK(rep.pass);
  // mu = p = 1 identically, so the weighted space-time integral is the
  // squared L^2(Q_T) norm of the solution.
  CHECK(rep.mu_min == doctest::Approx(1.0));
  CHECK(rep.int_mu == doctest::Approx(0.2));
}

TEST_CASE("duality bound on the coupled benchmark") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 64);
  const Trajectory traj = benchmark_run(m, mesh, 0.25, 50);
  const DualityReport rep = duality_check(m, traj);
  CHECK(rep.pass);
  CHECK(rep.ratio <= 1.05);
  CHECK(rep.lhs > 0.0);
}

TEST_CASE("duality check needs every snapshot") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 32);
  const Trajectory traj = benchmark_run(m, mesh, 0.1, 20, /*stride=*/5);
  CHECK_THROWS_AS(duality_check(m, traj), DomainError);
}

TEST_CASE("running weighted sum at an equilibrium is the exact product") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 32);
  Field U(mesh, 2);
  U.values.setConstant(1.0);
  const Trajectory traj = run(m, mesh, TimeGrid{0.1, 20}, U);
  // u* = (1,1): sum u = 2, A_i = (1+2)*1 = 3, sum A = 6 -> T * 2 * 6.
  CHECK(duality_sum(traj) == doctest::Approx(0.1 * 12.0).epsilon(1e-9));
}

TEST_CASE("running weighted sum is nondecreasing and refinement-stable") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 64);
  const Trajectory coarse = benchmark_run(m, mesh, 0.25, 50);
  const Trajectory fine = benchmark_run(m, mesh, 0.25, 100);
  double prev = 0.0;
  for (const LedgerRow& row : coarse.ledger) {
    CHECK(row.duality_sum >= prev - 1e-14);
    prev = row.duality_sum;
  }
  const DualitySumCheck chk = duality_sum_check(coarse, fine);
  CHECK(chk.stable);
  CHECK(chk.rel_change <= 0.20);
}

TEST_CASE("weight bound table dominates the trajectory weight") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 64);
  const Trajectory traj = benchmark_run(m, mesh, 0.25, 50);
  const DualityReport rep = duality_check(m, traj);
  REQUIRE_FALSE(rep.m_of_r.empty());
  // int mu <= lhs / R^2 + M(R) |Q_T| at R = 8.
  double m_at_8 = 0.0;
  for (const auto& [R, MR] : rep.m_of_r)
    if (R == 8.0) m_at_8 = MR;
  REQUIRE(m_at_8 > 0.0);
  const double qt = 0.25 * 1.0;
  CHECK(rep.int_mu <= rep.lhs / 64.0 + m_at_8 * qt + 1e-12);
}

TEST_CASE("tail integrals vanish above the trajectory maximum") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 32);
  const Trajectory traj = benchmark_run(m, mesh, 0.1, 20);
  double B = 0.0;
  for (const Field& snap : traj.snapshots)
    B = std::max(B, snap.values.maxCoeff());
  const auto table =
      equiintegrability_profile(m, traj, {B + 1.0, B + 2.0});
  for (const EquiintRow& row : table) {
    CHECK(row.tail_A == 0.0);
    CHECK(row.tail_R == 0.0);
  }
}

TEST_CASE("tail integrals decrease in the threshold and obey the sum bound") {
  ModelSpec m = skt_model();
  m.reaction.rho = Vec::Ones(2);
  m.reaction.c = Mat::Identity(2, 2);
  m.reaction.alpha = Mat::Constant(2, 2, 0.5);
  const Mesh mesh = Mesh::line(1.0, 64);
  const Trajectory traj = benchmark_run(m, mesh, 0.25, 50);
  const std::vector<double> thresholds{0.25, 0.5, 1.0, 2.0, 4.0};
  const auto table = equiintegrability_profile(m, traj, thresholds);
  const double sum = duality_sum(traj);
  for (size_t k = 0; k < table.size(); ++k) {
    if (k > 0) {
      CHECK(table[k].tail_A <= table[k - 1].tail_A + 1e-14);
      CHECK(table[k].tail_R <= table[k - 1].tail_R + 1e-14);
    }
    CHECK(table[k].tail_A <= sum / table[k].threshold + 1e-12);
  }
}

TEST_CASE("mass bounds without reactions reduce to conservation") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 32);
  const Trajectory traj = benchmark_run(m, mesh, 0.1, 20);
  const MassBoundCheck chk = mass_bound_check(m, traj);
  CHECK(chk.max_mass_ok);
  CHECK(chk.reaction_ok);
  CHECK(chk.max_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mass bounds with logistic reactions") {
  ModelSpec m = skt_model();
  m.reaction.rho = Vec::Ones(2);
  m.reaction.c = Mat::Identity(2, 2);
  m.reaction.alpha = Mat::Constant(2, 2, 0.5);
  const Mesh mesh = Mesh::line(1.0, 64);
  const Trajectory traj = benchmark_run(m, mesh, 0.25, 50);
  const MassBoundCheck chk = mass_bound_check(m, traj);
  CHECK(chk.max_mass_ok);
  CHECK(chk.reaction_ok);
  CHECK(chk.max_ratio <= std::pow(2.0, 2 * 1.0 * 0.25));
}

TEST_CASE("the ledger is a pure function of the snapshots") {
  ModelSpec m = skt_model();
  m.reaction.rho = Vec::Ones(2);
  m.reaction.c = Mat::Identity(2, 2);
  m.reaction.alpha = Mat::Constant(2, 2, 0.5);
  const Mesh mesh = Mesh::line(1.0, 64);
  RunSettings settings;
  Field U = gaussian_field(mesh, 2);
  const Trajectory traj = run(m, mesh, TimeGrid{0.1, 40}, U, settings);
  const auto replay =
      recompute_ledger(m, traj, settings.solver.newton_tol);
  REQUIRE(replay.size() == traj.ledger.size());
  for (size_t k = 0; k < replay.size(); ++k) {
    CHECK(replay[k].mass[0] == traj.ledger[k].mass[0]);
    CHECK(replay[k].mass[1] == traj.ledger[k].mass[1]);
    CHECK(replay[k].entropy == traj.ledger[k].entropy);
    CHECK(replay[k].tau_dissipation == traj.ledger[k].tau_dissipation);
    CHECK(replay[k].duality_sum == traj.ledger[k].duality_sum);
    CHECK(replay[k].min_u == traj.ledger[k].min_u);
    CHECK(replay[k].max_R_inf == traj.ledger[k].max_R_inf);
    CHECK(replay[k].all_ok() == traj.ledger[k].all_ok());
  }
}
