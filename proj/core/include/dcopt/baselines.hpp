#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dcopt/engine.hpp"
#include "dcopt/problem.hpp"
#include "dcopt/sparse.hpp"
#include "dcopt/subproblem.hpp"

namespace dcopt {

// Reference methods sharing the engine's trace schema and per-round byte
// charge, so their curves overlay the cocoa runs directly.

enum class BaselineMethod : std::uint8_t { prox_gd, minibatch_cd, admm };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::prox_gd;
  std::size_t max_rounds = 100;
  double gap_tolerance = std::numeric_limits<double>::infinity();
  std::size_t trace_every = 1;
  std::uint64_t seed = 1;

  double step = 0;  // prox-gd; 0 = tau / lambda_max(A^T A) by power iteration

  std::size_t batch_size = 1;  // minibatch-cd
  double beta = 1;             // update scale beta/b, beta in [1, b]

  double rho = 0;                // admm; 0 = tau / sigma' with sigma' = K
  std::size_t inner_passes = 5;  // admm block-solve epochs per round
  bool vary_rho = false;         // residual-balancing penalty schedule

  double sim_comm_seconds = 0;
  double sim_step_seconds = 0;
};

struct BaselineResult {
  std::vector<double> alpha;
  std::vector<RoundTrace> trace;
  GapValue final_gap{};
  std::size_t rounds = 0;
  std::uint64_t bytes_total = 0;
  double sim_seconds = 0;
  double rho_final = 0;  // admm only
};

// tau / lambda_max(A^T A), 50 power iterations.
double default_prox_gd_step(const ProblemInstance& problem,
                            std::uint64_t seed = 1);

// alpha <- prox_{step g}(alpha - step A^T grad f(A alpha)). Warns on stderr
// when step exceeds the estimated safe default.
std::vector<double> prox_gd_round(const ProblemInstance& problem,
                                  std::vector<double> alpha, double step);

// Jacobi-style: b distinct coordinates drawn by the caller's rng, each
// updated in closed form at the current alpha, applied scaled by beta/b.
std::vector<double> minibatch_cd_round(const ProblemInstance& problem,
                                       std::vector<double> alpha,
                                       std::size_t b, double beta,
                                       std::mt19937_64& rng);

struct AdmmState {
  double rho = 0;
  std::vector<double> alpha;            // global, grouped by partition blocks
  std::vector<double> w;                // consensus vector, length d
  std::vector<std::vector<double>> u;   // scaled duals, K of length d
  std::vector<std::vector<double>> wk;  // block copies, K of length d
};

AdmmState admm_init(const ProblemInstance& problem, const Partition& partition,
                    double rho);

// One consensus round: block updates in dual form by `inner_passes`
// coordinate epochs, proximal w-update, scaled dual ascent, optional
// residual-balancing rho step.
void admm_round(const ProblemInstance& problem, const Partition& partition,
                AdmmState& state, std::size_t inner_passes,
                bool vary_rho = false);

struct AdmmEquivalence {
  std::vector<double> minimizer_admm;
  std::vector<double> minimizer_cocoa;
  double max_abs_diff = 0;
};

// Solves the ADMM block subproblem and the cocoa local subproblem with
// matched linear terms to high precision; they coincide iff rho = tau/sigma'.
AdmmEquivalence admm_equivalence_check(const ProblemInstance& problem,
                                       const SubproblemView& view, double rho,
                                       std::size_t oracle_passes = 10000);

BaselineResult run_baseline(const ProblemInstance& problem,
                            const Partition& partition,
                            const BaselineConfig& config);

const char* to_string(BaselineMethod m);

}  // namespace dcopt
