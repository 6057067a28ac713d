#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "dcopt/local_solver.hpp"
#include "dcopt/problem.hpp"
#include "dcopt/sparse.hpp"

namespace dcopt {

struct RoundFlags {
  bool eval_only = false;      // report objective scalars; no solve, no update
  bool measure_theta = false;  // include the empirical-theta diagnostic
};

struct WorkerReply {
  std::uint32_t worker_id = 0;
  std::uint32_t steps = 0;
  // Both scalars describe the iterate the round STARTED from, so the
  // coordinator can certify objective values without alpha ever moving.
  double g_sum = 0;     // sum of g_i(alpha_i) over the block
  double conj_sum = 0;  // sum of g_i*(-x_i^T w) over the block, w = grad f(v)
  double theta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> delta_v;  // empty on eval-only rounds
};

// One worker's complete job description. Built identically for in-process
// and remote workers so both executors follow bit-identical trajectories.
struct WorkerInit {
  std::uint32_t worker_id = 0;
  std::uint32_t k_blocks = 1;
  double gamma = 1.0;
  double sigma_prime = 1.0;
  LocalSolverConfig solver;     // rng_seed already derived per worker
  std::uint32_t avg_start = 0;  // accumulate entering iterates from this round on; 0 = off
  std::uint32_t theta_oracle_passes = 200;
  SmoothTerm smooth;
  SeparableTerm separable;  // sliced to this block
  ColumnMatrix columns;     // the block's columns, local order
  std::vector<std::uint32_t> index;  // global column ids, ascending
};

class WorkerCore {
 public:
  explicit WorkerCore(WorkerInit init);

  // One bulk-synchronous round: derive w, report entering-iterate scalars,
  // solve the local subproblem, apply gamma * delta locally.
  WorkerReply process(std::uint32_t round_id, RoundFlags flags,
                      std::span<const double> v);

  std::span<const double> alpha() const { return alpha_; }
  // Mean of accumulated entering iterates; current alpha when none recorded.
  std::vector<double> averaged_alpha() const;
  const WorkerInit& init() const { return init_; }

 private:
  WorkerInit init_;
  std::vector<double> alpha_;
  std::vector<double> avg_accum_;
  std::size_t avg_count_ = 0;
  std::uint32_t last_round_ = 0;
  std::mt19937_64 rng_;
};

// Shard a problem across a partition. `solver.rng_seed` acts as the base
// seed; each worker gets its own decorrelated stream.
std::vector<WorkerInit> make_worker_inits(const ProblemInstance& problem,
                                          const Partition& partition,
                                          double gamma, double sigma_prime,
                                          const LocalSolverConfig& solver,
                                          std::uint32_t avg_start = 0,
                                          std::uint32_t theta_oracle_passes = 200);

}  // namespace dcopt
