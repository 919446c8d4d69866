#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "crossdiff/model.hpp"
#include "crossdiff/types.hpp"

namespace crossdiff {

struct DetailedBalanceResult {
  bool holds = false;
  std::optional<Vec> pi;            // normalized: first index of each
                                    // connected component gets weight 1
  std::vector<int> violated_cycle;  // closed walk witnessing failure
};

struct PairwiseResult {
  bool holds = false;
  bool sampled = false;  // closed-form for power laws, sampled otherwise
  std::optional<std::pair<int, int>> violating_pair;
  std::optional<std::pair<double, double>> witness_point;
};

struct RelaxedDbResult {
  bool holds = false;
  std::optional<std::pair<int, int>> violating_pair;
};

struct UniformEntropyResult {
  bool holds = false;
  // Scale-free margin: smallest eigenvalue of Diag(1/f) sym(D2H DA)
  // Diag(1/f) minus 1, minimized over the sample set.
  double min_margin = 0.0;
  Vec worst_point;
  bool blocks_ok = false;   // trace/det signs of every B^(i,j) block
  int skipped = 0;
};

struct StructureCertificate {
  DetailedBalanceResult detailed_balance;
  PairwiseResult pairwise;
  RelaxedDbResult relaxed_db;
  UniformEntropyResult uniform_entropy;
  std::optional<EntropySpec> entropy_spec;

  bool certified() const {
    return detailed_balance.holds && pairwise.holds && uniform_entropy.holds;
  }
};

/// Weights pi with pi_i m_ij = pi_j m_ji on every coupled pair, found by
/// ratio propagation along a spanning forest and cycle verification.
DetailedBalanceResult find_detailed_balance(const Mat& M);

/// Power-law closed form: s_i s_j <= 1 on every mutually coupled pair.
PairwiseResult check_pairwise(const ModelSpec& model);

/// Sampled variant of the two-point inequality for general nonlinearities,
/// on a log grid (x, y) in [1e-4, 1e4]^2.
PairwiseResult check_pairwise_sampled(const ScalarFn& qi, const ScalarFn& qj,
                                      int grid_points = 64);

/// B-block semidefiniteness without detailed balance (power laws).
RelaxedDbResult check_relaxed_db(const ModelSpec& model, const Vec& pi);

/// Samples the matrix inequality of the uniform-entropy definition on a
/// log-uniform box [1e-3, 1e3]^I.
UniformEntropyResult check_uniform_entropy(const ModelSpec& model,
                                           const EntropySpec& spec,
                                           int samples = 10000,
                                           std::uint64_t seed = 0);

/// Assembles the EntropySpec from the detailed-balance weights; throws
/// StructureError (carrying the violated cycle) when no weights exist.
EntropySpec build_entropy(const ModelSpec& model);

/// Full certification pipeline.
StructureCertificate certify(const ModelSpec& model, int samples = 10000,
                             std::uint64_t seed = 0);

}  // namespace crossdiff
