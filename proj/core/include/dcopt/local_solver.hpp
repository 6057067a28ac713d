#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dcopt/subproblem.hpp"

namespace dcopt {

struct LocalSolverConfig {
  std::size_t passes_H = 1;     // local epochs; one epoch = n_k coordinate steps
  std::uint64_t rng_seed = 1;
  bool shuffle = true;          // without replacement per epoch; false = i.i.d. draws
  bool check_monotone = false;  // verify G never increases per step (slow; tests)
};

struct LocalResult {
  std::vector<double> delta_block;  // coordinate updates, block-local order
  std::vector<double> delta_v;      // A_k * delta_block, maintained incrementally
  std::uint32_t steps_taken = 0;
};

// Exact minimization of G_k along coordinate i given the running update
// (delta, delta_v are updated in place). Returns the new delta_i.
double coordinate_step(const SubproblemView& view, std::size_t i,
                       std::span<double> delta, std::span<double> delta_v);

LocalResult run_local_solver(const SubproblemView& view,
                             const LocalSolverConfig& config);
// Same, drawing epoch orders from an external generator (a persistent worker
// keeps one stream across rounds).
LocalResult run_local_solver(const SubproblemView& view,
                             const LocalSolverConfig& config,
                             std::mt19937_64& rng);

// Empirical multiplicative accuracy of `result` against a high-pass oracle
// solve of the same view: 0 = oracle-quality, 1 = no progress over delta=0.
double measure_theta(const SubproblemView& view, const LocalResult& result,
                     std::size_t oracle_passes = 200);

}  // namespace dcopt
