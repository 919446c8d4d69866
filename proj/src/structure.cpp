#include "crossdiff/structure.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace crossdiff {

namespace {

constexpr double kDbRelTol = 1e-12;

bool db_pair_ok(double pi_i, double mij, double pi_j, double mji) {
  const double lhs = pi_i * mij, rhs = pi_j * mji;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) <= kDbRelTol * scale;
}

// Closed walk through the tree paths of u and v plus the edge (v, u).
std::vector<int> tree_cycle(const std::vector<int>& parent, int u, int v) {
  std::vector<int> up, vp;
  for (int a = u; a != -1; a = parent[a]) up.push_back(a);
  for (int b = v; b != -1; b = parent[b]) vp.push_back(b);
  // strip the common tail above the meeting point
  while (up.size() > 1 && vp.size() > 1 &&
         up[up.size() - 1] == vp[vp.size() - 1] &&
         up[up.size() - 2] == vp[vp.size() - 2]) {
    up.pop_back();
    vp.pop_back();
  }
  std::vector<int> cycle(up.begin(), up.end());
  for (auto it = vp.rbegin(); it != vp.rend(); ++it) {
    if (*it != cycle.back()) cycle.push_back(*it);
  }
  cycle.push_back(u);
  return cycle;
}

}  // namespace

DetailedBalanceResult find_detailed_balance(const Mat& M) {
  const int I = static_cast<int>(M.rows());
  if (M.cols() != I) throw DomainError("find_detailed_balance: M not square");
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < I; ++j)
      if (!(M(i, j) >= 0.0))
        throw DomainError("find_detailed_balance: negative entry");

  DetailedBalanceResult out;
  Vec pi = Vec::Zero(I);
  std::vector<int> parent(I, -1);
  std::vector<bool> seen(I, false);

  for (int root = 0; root < I; ++root) {
    if (seen[root]) continue;
    pi[root] = 1.0;
    seen[root] = true;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int i = queue.front();
      queue.pop_front();
      for (int j = 0; j < I; ++j) {
        if (j == i || (M(i, j) == 0.0 && M(j, i) == 0.0)) continue;
        if (M(i, j) == 0.0 || M(j, i) == 0.0) {
          // one-sided coupling: no positive weights can balance it
          out.holds = false;
          out.violated_cycle = {i, j, i};
          return out;
        }
        if (!seen[j]) {
          pi[j] = pi[i] * M(i, j) / M(j, i);
          parent[j] = i;
          seen[j] = true;
          queue.push_back(j);
        } else if (!db_pair_ok(pi[i], M(i, j), pi[j], M(j, i))) {
          out.holds = false;
          out.violated_cycle = tree_cycle(parent, i, j);
          return out;
        }
      }
    }
  }
  out.holds = true;
  out.pi = pi;
  return out;
}

PairwiseResult check_pairwise(const ModelSpec& model) {
  const int I = model.species();
  const Mat& M = model.pressure.interaction;
  const Vec& s = model.pressure.exponents;
  PairwiseResult out;
  out.sampled = false;
  for (int i = 0; i < I; ++i) {
    for (int j = i + 1; j < I; ++j) {
      if (M(i, j) * M(j, i) <= 0.0) continue;
      if (s[i] * s[j] > 1.0) {
        out.holds = false;
        out.violating_pair = {i, j};
        // q_i(1) q_j(1) - q_i'(1) q_j'(1) = 1 - s_i s_j < 0
        out.witness_point = {1.0, 1.0};
        return out;
      }
    }
  }
  out.holds = true;
  return out;
}

PairwiseResult check_pairwise_sampled(const ScalarFn& qi, const ScalarFn& qj,
                                      int grid_points) {
  PairwiseResult out;
  out.sampled = true;
  const double lo = std::log(1e-4), hi = std::log(1e4);
  for (int a = 0; a < grid_points; ++a) {
    const double x = std::exp(lo + (hi - lo) * a / (grid_points - 1));
    for (int b = 0; b < grid_points; ++b) {
      const double y = std::exp(lo + (hi - lo) * b / (grid_points - 1));
      const double lhs = qi.value(x) * qj.value(y);
      const double rhs = x * y * qi.deriv(x) * qj.deriv(y);
      if (lhs - rhs < -1e-12 * std::max(std::abs(lhs), std::abs(rhs))) {
        out.holds = false;
        out.witness_point = {x, y};
        return out;
      }
    }
  }
  out.holds = true;
  return out;
}

RelaxedDbResult check_relaxed_db(const ModelSpec& model, const Vec& pi) {
  const int I = model.species();
  const Mat& M = model.pressure.interaction;
  const Vec& s = model.pressure.exponents;
  RelaxedDbResult out;
  for (int i = 0; i < I; ++i) {
    for (int j = i + 1; j < I; ++j) {
      if (M(i, j) == 0.0 && M(j, i) == 0.0) continue;  // vacuous
      const double a = pi[i] * M(i, j), b = pi[j] * M(j, i);
      const double ss = s[i] * s[j];
      const double mean = 0.5 * (a + b);
      const double lhs = a * b * ss - ss * ss * mean * mean;
      if (lhs < -1e-12 * std::max(1.0, mean * mean)) {
        out.holds = false;
        out.violating_pair = {i, j};
        return out;
      }
    }
  }
  out.holds = true;
  return out;
}

UniformEntropyResult check_uniform_entropy(const ModelSpec& model,
                                           const EntropySpec& spec,
                                           int samples, std::uint64_t seed) {
  const int I = model.species();
  const Mat& M = model.pressure.interaction;
  const PressureLaw& p = model.pressure;
  UniformEntropyResult out;
  out.min_margin = std::numeric_limits<double>::infinity();
  out.blocks_ok = true;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logbox(std::log(1e-3), std::log(1e3));

  // Weights carried by the quadratic form q_i'(z)/z per species: pi_i is
  // stored against h_i'' = z^{s-2} = q_i'(z)/(s_i z).
  Vec tilde(I);
  for (int i = 0; i < I; ++i) tilde[i] = spec.pi[i] / spec.s[i];

  Eigen::SelfAdjointEigenSolver<Mat> eig;
  for (int n = 0; n < samples; ++n) {
    Vec X(I);
    for (int i = 0; i < I; ++i) X[i] = std::exp(logbox(rng));
    if ((X.array() <= 0.0).any()) {
      ++out.skipped;
      continue;
    }
    const Vec hess = eval_hess_entropy(spec, X);
    const Mat DA = eval_DA(model, X);
    Mat Q = hess.asDiagonal() * DA;
    Mat S = 0.5 * (Q + Q.transpose());
    // Scale-free margin: S >= Diag(f^2) iff Diag(1/f) S Diag(1/f) >= Id,
    // so the eigenvalue comparison is against 1 at every sample.
    Vec finv(I);
    for (int i = 0; i < I; ++i)
      finv[i] = 1.0 / std::sqrt(spec.f_squared(i, X[i]));
    const Mat Sn = finv.asDiagonal() * S * finv.asDiagonal();
    eig.compute(Sn, Eigen::EigenvaluesOnly);
    const double margin = eig.eigenvalues().minCoeff() - 1.0;
    if (margin < out.min_margin) {
      out.min_margin = margin;
      out.worst_point = X;
    }

    // 2x2 interaction blocks: nonnegative trace and determinant
    for (int i = 0; i < I && out.blocks_ok; ++i) {
      for (int j = i + 1; j < I; ++j) {
        if (M(i, j) == 0.0 && M(j, i) == 0.0) continue;
        Mat B(2, 2);
        B(0, 0) = tilde[i] * M(i, j) * p.q(j, X[j]) * p.dq(i, X[i]) / X[i];
        B(0, 1) = tilde[i] * M(i, j) * p.dq(i, X[i]) * p.dq(j, X[j]);
        B(1, 0) = tilde[j] * M(j, i) * p.dq(i, X[i]) * p.dq(j, X[j]);
        B(1, 1) = tilde[j] * M(j, i) * p.q(i, X[i]) * p.dq(j, X[j]) / X[j];
        const double tr = B(0, 0) + B(1, 1);
        const double det = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
        const double bnorm = B.cwiseAbs().maxCoeff();
        if (tr < -1e-12 * std::max(1.0, bnorm) ||
            det < -1e-12 * std::max(1.0, bnorm * bnorm)) {
          out.blocks_ok = false;
          break;
        }
      }
    }
  }
  out.holds = out.min_margin >= -1e-10 && out.blocks_ok;
  return out;
}

namespace {

// The PSD argument needs the weights against q_i'(z)/z; the stored h_i''
// is z^{s-2} = q_i'(z)/(s_i z), so the stored weight is s_i times the
// balance weight. The balance weights are rescaled to min 1 so that the
// diagonal term dominates the unweighted floor Diag(f_i^2).
EntropySpec assemble_entropy(const ModelSpec& model, const Vec& balance_pi) {
  EntropySpec spec;
  Vec tilde = balance_pi;
  tilde /= tilde.minCoeff();
  spec.s = model.pressure.exponents;
  spec.d = model.pressure.d;
  spec.pi = (tilde.array() * spec.s.array()).matrix();
  return spec;
}

}  // namespace

EntropySpec build_entropy(const ModelSpec& model) {
  model.validate();
  DetailedBalanceResult db = find_detailed_balance(model.pressure.interaction);
  if (!db.holds) {
    throw StructureError("build_entropy: no detailed balance weights",
                         db.violated_cycle);
  }
  return assemble_entropy(model, *db.pi);
}

StructureCertificate certify(const ModelSpec& model, int samples,
                             std::uint64_t seed) {
  model.validate();
  StructureCertificate cert;
  cert.detailed_balance = find_detailed_balance(model.pressure.interaction);
  cert.pairwise = check_pairwise(model);

  const Vec pi = cert.detailed_balance.holds
                     ? *cert.detailed_balance.pi
                     : Vec::Ones(model.species());
  cert.relaxed_db = check_relaxed_db(model, pi);

  const EntropySpec spec = assemble_entropy(model, pi);
  cert.uniform_entropy = check_uniform_entropy(model, spec, samples, seed);
  if (cert.detailed_balance.holds && cert.uniform_entropy.holds) {
    cert.entropy_spec = spec;
  }
  return cert;
}

}  // namespace crossdiff
