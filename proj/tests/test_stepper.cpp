#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crossdiff/stepper.hpp"
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

}  // namespace

TEST_CASE("time-grid validation reports the admissible step size") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Zero(1, 1), Vec::Ones(1));
  m.reaction.rho = Vec::Ones(1);
  m.reaction.c = Mat::Zero(1, 1);
  m.reaction.alpha = Mat::Zero(1, 1);
  CHECK_NOTHROW(validate_time_grid(m, TimeGrid{1.0, 10}));
  CHECK_THROWS_AS(validate_time_grid(m, TimeGrid{1.0, 1}), DomainError);
  try {
    validate_time_grid(m, TimeGrid{1.0, 1});
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
}

TEST_CASE("initial floor: data above the floor is unchanged") {
  const Mesh mesh = Mesh::line(1.0, 16);
  Field U(mesh, 1);
  U.values.setConstant(0.5);
  const Field out = prepare_initial(mesh, U, 100);
  CHECK((out.values - U.values).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("initial floor: zero data becomes the constant floor") {
  const Mesh mesh = Mesh::line(1.0, 16);
  Field U(mesh, 1);
  const Field out = prepare_initial(mesh, U, 100);
  CHECK(out.values.minCoeff() == doctest::Approx(0.01));
  CHECK(out.values.maxCoeff() == doctest::Approx(0.01));
  CHECK(integrate_species(mesh, out)[0] == doctest::Approx(0.01));
}

TEST_CASE("initial floor: mass excess shrinks under refinement") {
  const Mesh mesh = Mesh::line(1.0, 64);
  Field U(mesh, 1);
  for (int i = 0; i < 64; ++i)
    U.values(0, i) = std::max(0.0, mesh.coordinate(i, 0) - 0.5);
  const double mN = integrate_species(mesh, prepare_initial(mesh, U, 50))[0];
  const double m2N = integrate_species(mesh, prepare_initial(mesh, U, 100))[0];
  CHECK(m2N <= mN + 1e-14);
}

TEST_CASE("initial floor rejects negative data") {
  const Mesh mesh = Mesh::line(1.0, 8);
  Field U(mesh, 1);
  U.values.setConstant(-0.1);
  CHECK_THROWS_AS(prepare_initial(mesh, U, 10), DomainError);
}

TEST_CASE("a reaction equilibrium is a fixed point of the step") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Ones(1, 1), Vec::Ones(1));
  m.reaction.rho = Vec::Ones(1);
  m.reaction.c = Mat::Ones(1, 1);
  m.reaction.alpha = Mat::Constant(1, 1, 0.5);  // r(1) = 0
  const Mesh mesh = Mesh::line(1.0, 32);
  const NeumannLaplacian lap(mesh);
  Field U(mesh, 1);
  U.values.setConstant(1.0);
  const StepResult res = step(m, mesh, lap, U, 0.01);
  CHECK((res.U.values.array() - 1.0).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("the step conserves mass without reactions") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 64);
  const NeumannLaplacian lap(mesh);
  Field U = gaussian_field(mesh, 2);
  SolverSettings settings;
  settings.newton_tol = 1e-13;
  const StepResult res = step(m, mesh, lap, U, 0.005, settings);
  const Vec before = integrate_species(mesh, U);
  const Vec after = integrate_species(mesh, res.U);
  CHECK((after - before).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(res.U.values.minCoeff() > 0.0);
}

TEST_CASE("per-step mass identity with reactions") {
  ModelSpec m = skt_model();
  m.reaction.rho = Vec::Ones(2);
  m.reaction.c = Mat::Identity(2, 2);
  m.reaction.alpha = Mat::Constant(2, 2, 0.5);
  const Mesh mesh = Mesh::line(1.0, 64);
  const NeumannLaplacian lap(mesh);
  Field U = gaussian_field(mesh, 2);
  const double tau = 0.005;
  SolverSettings settings;
  settings.newton_tol = 1e-13;
  const StepResult res = step(m, mesh, lap, U, tau, settings);
  for (int i = 0; i < 2; ++i) {
    Vec Ri(mesh.num_nodes());
    for (int node = 0; node < mesh.num_nodes(); ++node)
      Ri[node] = eval_reaction(m, res.U.values.col(node))[i];
    const double lhs = integrate(mesh, res.U.values.row(i).transpose()) -
                       integrate(mesh, U.values.row(i).transpose());
    CHECK(std::abs(lhs - tau * integrate(mesh, Ri)) <= 1e-12);
  }
}

TEST_CASE("constant-pressure step equals the dense backward-Euler solve") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Zero(1, 1), Vec::Ones(1));
  const int n = 64;
  const Mesh mesh = Mesh::line(1.0, n);
  const NeumannLaplacian lap(mesh);
  Field U = gaussian_field(mesh, 1);
  const double tau = 0.01;
  const StepResult res = step(m, mesh, lap, U, tau);

  const Mat Aimp = Mat::Identity(n, n) - tau * Mat(lap.L);
  const Vec exact = Aimp.partialPivLu().solve(Vec(U.values.row(0).transpose()));
  CHECK((res.U.values.row(0).transpose() - exact).lpNorm<Eigen::Infinity>() <=
        1e-10);
}

TEST_CASE("a single-step run equals one step call") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 32);
  const NeumannLaplacian lap(mesh);
  Field U = gaussian_field(mesh, 2);
  const TimeGrid tg{0.01, 1};
  const Trajectory traj = run(m, mesh, tg, U);
  const Field U0 = prepare_initial(mesh, U, 1);
  const StepResult res = step(m, mesh, lap, U0, tg.tau());
  CHECK((traj.snapshots.back().values - res.U.values)
            .lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(traj.ledger.size() == 1);
}

TEST_CASE("decoupled heat system relaxes at the spectral-gap rate") {
  ModelSpec m = make_model(Vec(Vec::Ones(2)), Mat(Mat::Zero(2, 2)),
                           Vec(Vec::Ones(2)));
  const int n = 64;
  const Mesh mesh = Mesh::line(1.0, n);
  Field U(mesh, 2);
  for (int node = 0; node < n; ++node) {
    const double x = mesh.coordinate(node, 0);
    U.values(0, node) = 1.0 + 0.5 * std::cos(M_PI * x);
    U.values(1, node) = 1.0 + 0.25 * std::cos(M_PI * x);
  }
  const TimeGrid tg{1.0, 400};
  const Trajectory traj = run(m, mesh, tg, U);
  const Field& last = traj.snapshots.back();
  const double h = mesh.h(0);
  // Discrete Neumann gap of the first cosine mode, with the backward-Euler
  // amplification (1 + tau lambda)^{-N} instead of e^{-lambda T}.
  const double lambda = 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2), 2);
  const double decay = std::pow(1.0 + tg.tau() * lambda, -tg.N);
  for (int i = 0; i < 2; ++i) {
    const double amp0 = (i == 0 ? 0.5 : 0.25);
    const double dev =
        (last.values.row(i).array() - 1.0).abs().maxCoeff();
    CHECK(dev == doctest::Approx(amp0 * decay).epsilon(0.10));
  }
}

TEST_CASE("symmetric two-species run passes every ledger check") {
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 64);
  Field U = gaussian_field(mesh, 2);
  const TimeGrid tg{0.25, 100};
  const Trajectory traj = run(m, mesh, tg, U);
  REQUIRE(traj.ledger.size() == 100);
  for (const LedgerRow& row : traj.ledger) {
    CHECK(row.all_ok());
    CHECK(row.entropy_checked);
    CHECK(row.min_u > 0.0);
  }
  // Without reactions the entropy is nonincreasing.
  for (size_t k = 1; k < traj.ledger.size(); ++k)
    CHECK(traj.ledger[k].entropy <=
          traj.ledger[k - 1].entropy + 1e-8);
}

TEST_CASE("strict mode propagates ledger failures as errors") {
  // A healthy run in strict mode must not throw.
  ModelSpec m = skt_model();
  const Mesh mesh = Mesh::line(1.0, 32);
  Field U = gaussian_field(mesh, 2);
  RunSettings settings;
  settings.strict = true;
  CHECK_NOTHROW(run(m, mesh, TimeGrid{0.05, 20}, U, settings));
}
