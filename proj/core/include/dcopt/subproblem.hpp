#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcopt/problem.hpp"
#include "dcopt/sparse.hpp"

namespace dcopt {

// Everything machine k needs to evaluate or minimize its local model
//   G_k(delta) = (1/K) f(v) + w^T A_k delta + (sigma'/2 tau) |A_k delta|^2
//                + sum_i g_i(alpha_i + delta_i)
// over the block's own coordinates. All spans alias caller storage.
struct SubproblemView {
  std::span<const double> v;            // shared vector, length d
  std::span<const double> w;            // grad f(v), length d
  const ColumnMatrix* columns = nullptr;   // the block's columns (local matrix)
  std::span<const double> alpha_block;  // current local coefficients
  const SeparableTerm* separable = nullptr;  // sliced to this block
  const SmoothTerm* smooth = nullptr;        // for the (1/K) f(v) constant
  double sigma_prime = 1.0;
  double tau = 1.0;
  double gamma = 1.0;
  std::size_t k_blocks = 1;

  void validate() const;
};

// Value of G_k at a candidate block update. `delta` is in block-local order.
double subproblem_value(const SubproblemView& view,
                        std::span<const double> delta);

// The always-valid aggregation-safety pair: sigma' = gamma * K.
double safe_sigma_prime(double gamma, std::size_t k_blocks);

struct SigmaEstimate {
  double sigma_min_estimate;  // gamma * max_alpha |A alpha|^2 / sum_k |A_k alpha_k|^2
  double safe_bound;          // gamma * K
  std::size_t k_blocks;
  double gamma;
};

// Power-iteration estimate of the smallest safe sigma'. Diagnostic only:
// an estimate is not a certified upper bound, so it is never auto-applied.
SigmaEstimate estimate_sigma_min(const ColumnMatrix& matrix,
                                 const Partition& partition, double gamma,
                                 std::size_t iterations = 100,
                                 std::uint64_t seed = 1);

struct Lemma1Result {
  double lhs;   // O_A(alpha + gamma * sum_k delta_k)
  double rhs;   // (1-gamma) O_A(alpha) + gamma * sum_k G_k(delta_k)
  bool holds;   // lhs <= rhs + 1e-9
};

// Checks the block-separable upper bound on the global objective for one
// concrete (alpha, delta) pair. `deltas` holds one block-local vector per
// block, in partition order.
Lemma1Result lemma1_check(const ProblemInstance& problem,
                          const Partition& partition,
                          std::span<const double> alpha,
                          const std::vector<std::vector<double>>& deltas,
                          double gamma, double sigma_prime);

}  // namespace dcopt
