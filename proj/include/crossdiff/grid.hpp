#pragma once

#include <array>

#include "crossdiff/model.hpp"
#include "crossdiff/types.hpp"

namespace crossdiff {

/// Uniform cell-centered mesh on a box, 1-D or 2-D.
struct Mesh {
  int dim = 1;
  std::array<double, 2> extents{1.0, 1.0};
  std::array<int, 2> n{0, 0};  // nodes per axis

  static Mesh line(double length, int nodes);
  static Mesh rect(double lx, double ly, int nx, int ny);

  int num_nodes() const { return dim == 1 ? n[0] : n[0] * n[1]; }
  double h(int axis) const { return extents[axis] / n[axis]; }
  double cell_volume() const {
    return dim == 1 ? h(0) : h(0) * h(1);
  }
  double volume() const {
    return dim == 1 ? extents[0] : extents[0] * extents[1];
  }
  /// Cell-center coordinate of a node along an axis (x-fastest ordering).
  double coordinate(int node, int axis) const;
  void validate() const;
};

/// Vector-valued grid function, one row per species.
struct Field {
  const Mesh* mesh = nullptr;
  Mat values;  // I x N_h

  Field() = default;
  Field(const Mesh& m, int species)
      : mesh(&m), values(Mat::Zero(species, m.num_nodes())) {}
  int species() const { return static_cast<int>(values.rows()); }
};

/// Second-order zero-flux Laplacian; the diagonal is assembled as the
/// negated sum of the off-diagonal entries, so row sums are exactly zero.
struct NeumannLaplacian {
  SpMat L;  // approximates Delta; -L is PSD with kernel = constants

  explicit NeumannLaplacian(const Mesh& mesh);
};

/// Midpoint quadrature: sum * h^dim.
double integrate(const Mesh& mesh, const Eigen::Ref<const Vec>& values);

/// Per-species masses of a field.
Vec integrate_species(const Mesh& mesh, const Field& U);

/// Discrete H^-1 norm: solves -L phi = u - mean(u) and returns
/// sqrt(sum over faces of |grad phi|^2). Zero iff u is constant.
double hminus1_norm(const Mesh& mesh, const NeumannLaplacian& lap,
                    const Eigen::Ref<const Vec>& u);

/// Face-based quadrature of <grad U, sym(D2H DA) grad U> with the matrix
/// evaluated at arithmetic face averages. Requires U > 0 nodewise.
double dissipation(const Mesh& mesh, const ModelSpec& model,
                   const EntropySpec& spec, const Field& U);

/// Face-based quadrature of sum_i f_i(u_i)^2 |grad u_i|^2, the diagonal
/// floor the uniform-entropy inequality guarantees for the dissipation.
double dissipation_floor(const Mesh& mesh, const EntropySpec& spec,
                         const Field& U);

}  // namespace crossdiff
