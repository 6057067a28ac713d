#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dcopt/executor.hpp"
#include "dcopt/local_solver.hpp"
#include "dcopt/problem.hpp"
#include "dcopt/sparse.hpp"

namespace dcopt {

struct EngineConfig {
  double gamma = 1.0;
  std::optional<double> sigma_prime;  // default: the safe bound gamma * K
  std::size_t max_rounds = 100;
  // Stop once the certified gap falls to this; +inf disables the rule and the
  // run lasts exactly max_rounds.
  double gap_tolerance = std::numeric_limits<double>::infinity();
  LocalSolverConfig local;  // rng_seed is the base; workers derive their own
  std::size_t trace_every = 1;   // 0: record only the final row
  // Average the entering iterates of the last W rounds (Theorem-2 style
  // averaged iterate); 0 = off.
  std::size_t averaging_window = 0;
  std::size_t measure_theta_every = 0;  // 0 = never
  std::uint32_t theta_oracle_passes = 200;
  // Deterministic simulated clock for the trace's seconds column: each round
  // costs sim_comm_seconds plus sim_step_seconds per coordinate step of the
  // slowest worker. Real wall time is reported separately.
  double sim_comm_seconds = 0;
  double sim_step_seconds = 0;

  double effective_sigma(std::size_t k_blocks) const;
  void validate(std::size_t k_blocks) const;
};

struct RoundTrace {
  std::size_t round;  // iterate index; 0 is the all-zeros start
  double seconds;     // simulated clock when this iterate was completed
  double objective_a;
  double objective_b;
  double gap;
  std::uint64_t bytes;  // solver bytes on the wire through this iterate
  double theta = std::numeric_limits<double>::quiet_NaN();  // worst worker
};

struct SolveResult {
  std::vector<double> alpha;
  std::vector<double> averaged_alpha;  // empty unless averaging was on
  std::vector<double> v;               // final shared vector (= A alpha)
  std::vector<RoundTrace> trace;       // always ends with the final iterate
  GapValue final_gap{};                // certified at the returned alpha
  std::size_t rounds = 0;              // solve rounds executed
  std::uint64_t bytes_total = 0;       // includes the final eval exchange
  double sim_seconds = 0;
  double wall_seconds = 0;
};

// First round id whose entering iterate enters the average (0 = off).
std::uint32_t averaging_start_round(const EngineConfig& config);

// The outer loop: alpha = 0, v = 0; per round broadcast v, solve local
// subproblems in parallel, reduce v += gamma * sum delta_v (ascending worker
// id); certify the duality gap from worker-reported scalars; stop on
// tolerance or round budget, then certify the final iterate with one
// eval-only exchange.
SolveResult run_cocoa(const ProblemInstance& problem,
                      const Partition& partition, Executor& executor,
                      const EngineConfig& config);

struct InputSolveOutcome {
  std::vector<double> model;  // in input coordinates (feature space)
  SolveResult run;
  Variant variant;
  ProblemCase problem_case;
};

// One-call path: classify the input problem, pick/force the variant, build
// the mapped instance, partition columns, run on an in-process executor, and
// map the solution back (primal: alpha; dual: w = grad f(v)).
InputSolveOutcome solve_input(const InputProblem& input, const Dataset& data,
                              std::size_t k_blocks, const EngineConfig& config,
                              std::optional<Variant> variant_override = {},
                              std::uint64_t partition_seed = 1,
                              const BuildOptions& build = {});

// Exact per-round wire cost (identical for both executors; the thread pool
// charges what the TCP runtime would send).
std::uint64_t round_bytes(std::size_t k_blocks, std::size_t shared_dim);
std::uint64_t eval_round_bytes(std::size_t k_blocks, std::size_t shared_dim);

}  // namespace dcopt
