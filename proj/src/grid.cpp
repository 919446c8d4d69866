#include "crossdiff/grid.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <vector>

namespace crossdiff {

Mesh Mesh::line(double length, int nodes) {
  Mesh m;
  m.dim = 1;
  m.extents = {length, 0.0};
  m.n = {nodes, 0};
  m.validate();
  return m;
}

Mesh Mesh::rect(double lx, double ly, int nx, int ny) {
  Mesh m;
  m.dim = 2;
  m.extents = {lx, ly};
  m.n = {nx, ny};
  m.validate();
  return m;
}

double Mesh::coordinate(int node, int axis) const {
  const int idx = (dim == 1 || axis == 0) ? node % n[0] : node / n[0];
  return (idx + 0.5) * h(axis);
}

void Mesh::validate() const {
  if (dim != 1 && dim != 2) throw DomainError("Mesh: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (n[a] < 3) throw DomainError("Mesh: need at least 3 nodes per axis");
    if (!(extents[a] > 0.0)) throw DomainError("Mesh: extent must be > 0");
  }
}

NeumannLaplacian::NeumannLaplacian(const Mesh& mesh) {
  mesh.validate();
  const int N = mesh.num_nodes();
  const int nx = mesh.n[0];
  const int ny = mesh.dim == 2 ? mesh.n[1] : 1;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(N) * 5);
  std::vector<double> diag(N, 0.0);

  auto couple = [&](int a, int b, double w) {
    trip.emplace_back(a, b, w);
    diag[a] -= w;
  };

  // Quantize the stencil weights to integer multiples of a common
  // power-of-two unit: every row-sum addition then happens in exact
  // integer arithmetic, so L * 1 is bitwise zero in any accumulation
  // order. The relative perturbation of the operator is <= 2^-47.
  double wx = 1.0 / (mesh.h(0) * mesh.h(0));
  double wy = mesh.dim == 2 ? 1.0 / (mesh.h(1) * mesh.h(1)) : 0.0;
  const double unit = std::ldexp(1.0, std::ilogb(std::max(wx, wy)) - 47);
  wx = std::round(wx / unit) * unit;
  wy = std::round(wy / unit) * unit;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int node = iy * nx + ix;
      if (ix > 0) couple(node, node - 1, wx);
      if (ix + 1 < nx) couple(node, node + 1, wx);
      if (mesh.dim == 2) {
        if (iy > 0) couple(node, node - nx, wy);
        if (iy + 1 < ny) couple(node, node + nx, wy);
      }
    }
  }
  for (int i = 0; i < N; ++i) trip.emplace_back(i, i, diag[i]);
  L.resize(N, N);
  L.setFromTriplets(trip.begin(), trip.end());
  L.makeCompressed();
}

double integrate(const Mesh& mesh, const Eigen::Ref<const Vec>& values) {
  if (values.size() != mesh.num_nodes())
    throw DomainError("integrate: field/mesh size mismatch");
  return values.sum() * mesh.cell_volume();
}

Vec integrate_species(const Mesh& mesh, const Field& U) {
  if (U.mesh != &mesh || U.values.cols() != mesh.num_nodes())
    throw DomainError("integrate_species: field/mesh mismatch");
  return U.values.rowwise().sum() * mesh.cell_volume();
}

double hminus1_norm(const Mesh& mesh, const NeumannLaplacian& lap,
                    const Eigen::Ref<const Vec>& u) {
  const int N = mesh.num_nodes();
  if (u.size() != N) throw DomainError("hminus1_norm: size mismatch");
  const Vec b = u.array() - u.mean();
  if (b.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;

  const SpMat negL = (-lap.L).eval();
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(20 * N);
  cg.compute(negL);
  const Vec phi = cg.solve(b);
  if (cg.info() != Eigen::Success && cg.error() > 1e-10) {
    throw ConvergenceError("hminus1_norm: Poisson solve did not converge",
                           cg.error());
  }
  // phi^T (-L) phi = phi^T b, times the cell volume
  const double sq = phi.dot(b) * mesh.cell_volume();
  return std::sqrt(std::max(0.0, sq));
}

namespace {

template <typename FaceTerm>
double face_quadrature(const Mesh& mesh, const Field& U, FaceTerm&& term) {
  if (U.mesh != &mesh) throw DomainError("face quadrature: mesh mismatch");
  const int nx = mesh.n[0];
  const int ny = mesh.dim == 2 ? mesh.n[1] : 1;
  double total = 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const int a = iy * nx + ix;
      total += term(a, a + 1, mesh.h(0));
    }
  }
  if (mesh.dim == 2) {
    for (int iy = 0; iy + 1 < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int a = iy * nx + ix;
        total += term(a, a + nx, mesh.h(1));
      }
    }
  }
  return total * mesh.cell_volume();
}

}  // namespace

double dissipation(const Mesh& mesh, const ModelSpec& model,
                   const EntropySpec& spec, const Field& U) {
  if ((U.values.array() <= 0.0).any())
    throw DomainError("dissipation: field must be strictly positive");
  return face_quadrature(mesh, U, [&](int a, int b, double h) {
    const Vec g = (U.values.col(b) - U.values.col(a)) / h;
    const Vec Xbar = 0.5 * (U.values.col(a) + U.values.col(b));
    const Mat Q =
        eval_hess_entropy(spec, Xbar).asDiagonal() * eval_DA(model, Xbar);
    return g.dot(Q * g);  // only the symmetric part contributes
  });
}

double dissipation_floor(const Mesh& mesh, const EntropySpec& spec,
                         const Field& U) {
  if ((U.values.array() <= 0.0).any())
    throw DomainError("dissipation_floor: field must be strictly positive");
  return face_quadrature(mesh, U, [&](int a, int b, double h) {
    const Vec g = (U.values.col(b) - U.values.col(a)) / h;
    const Vec Xbar = 0.5 * (U.values.col(a) + U.values.col(b));
    double sum = 0.0;
    for (int i = 0; i < spec.species(); ++i)
      sum += spec.f_squared(i, Xbar[i]) * g[i] * g[i];
    return sum;
  });
}

}  // namespace crossdiff
