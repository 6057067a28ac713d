#include "dcopt/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dcopt/error.hpp"
#include "dcopt/subproblem.hpp"
#include "dcopt/thread_executor.hpp"
#include "dcopt/wire.hpp"

namespace dcopt {

double EngineConfig::effective_sigma(std::size_t k_blocks) const {
  if (sigma_prime) return *sigma_prime;
  return gamma * static_cast<double>(k_blocks);
}

void EngineConfig::validate(std::size_t k_blocks) const {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("engine: gamma must be in (0, 1]");
  double sigma = effective_sigma(k_blocks);
  if (!(sigma >= gamma))
    throw std::invalid_argument("engine: sigma' must be >= gamma");
  if (max_rounds < 1)
    throw std::invalid_argument("engine: max_rounds must be >= 1");
  if (std::isnan(gap_tolerance) || gap_tolerance < 0.0)
    throw std::invalid_argument("engine: gap_tolerance must be >= 0");
  if (local.passes_H < 1)
    throw std::invalid_argument("engine: passes_H must be >= 1");
  if (sim_comm_seconds < 0 || sim_step_seconds < 0)
    throw std::invalid_argument("engine: simulated costs must be >= 0");
}

std::uint32_t averaging_start_round(const EngineConfig& config) {
  if (config.averaging_window == 0) return 0;
  if (config.averaging_window >= config.max_rounds) return 1;
  return static_cast<std::uint32_t>(config.max_rounds -
                                    config.averaging_window + 1);
}

std::uint64_t round_bytes(std::size_t k_blocks, std::size_t shared_dim) {
  return static_cast<std::uint64_t>(k_blocks) *
         (broadcast_frame_bytes(shared_dim) + result_frame_bytes(shared_dim));
}

std::uint64_t eval_round_bytes(std::size_t k_blocks, std::size_t shared_dim) {
  return static_cast<std::uint64_t>(k_blocks) *
         (broadcast_frame_bytes(shared_dim) + result_frame_bytes(0));
}

namespace {

struct RoundScalars {
  double objective_a;
  double objective_b;
  double gap;
  double raw;
  double theta;  // worst measured worker, NaN when unmeasured
  std::uint32_t steps_max;
};

RoundScalars certify(const ProblemInstance& problem,
                     std::span<const double> v,
                     const std::vector<WorkerReply>& replies,
                     std::size_t round_of_iterate) {
  RoundScalars s{};
  double g_total = 0, conj_total = 0;
  s.theta = std::numeric_limits<double>::quiet_NaN();
  s.steps_max = 0;
  for (const auto& r : replies) {
    g_total += r.g_sum;
    conj_total += r.conj_sum;
    s.steps_max = std::max(s.steps_max, r.steps);
    if (!std::isnan(r.theta))
      s.theta = std::isnan(s.theta) ? r.theta : std::max(s.theta, r.theta);
  }
  s.objective_a = problem.smooth.value(v) + g_total;
  std::vector<double> w = map_w(problem, v);
  s.objective_b = problem.smooth.conjugate(w) + conj_total;
  s.raw = s.objective_a + s.objective_b;
  if (s.raw < -1e-9)
    throw numerical_error("round " + std::to_string(round_of_iterate) +
                          ": certified gap " + std::to_string(s.raw) +
                          " below -1e-9");
  s.gap = s.raw < 0 ? 0.0 : s.raw;
  return s;
}

}  // namespace

SolveResult run_cocoa(const ProblemInstance& problem,
                      const Partition& partition, Executor& executor,
                      const EngineConfig& config) {
  problem.validate();
  partition.validate(problem.dim_partitioned());
  const std::size_t K = partition.k_blocks;
  config.validate(K);
  if (executor.worker_count() != K)
    throw contract_error("engine: executor has " +
                         std::to_string(executor.worker_count()) +
                         " workers for " + std::to_string(K) + " blocks");
  const std::size_t d = problem.dim_shared();
  if (executor.shared_dim() != d)
    throw contract_error("engine: executor shared dim mismatch");

  auto wall_start = std::chrono::steady_clock::now();

  SolveResult out;
  std::vector<double> v(d, 0.0);
  std::uint64_t bytes_cum = 0;  // solve exchanges only
  double sim_now = 0;
  const double tol = config.gap_tolerance;
  const bool tol_active = std::isfinite(tol);

  std::size_t t = 1;
  for (; t <= config.max_rounds; ++t) {
    RoundFlags flags;
    flags.measure_theta = config.measure_theta_every > 0 &&
                          (t - 1) % config.measure_theta_every == 0;
    executor.broadcast(static_cast<std::uint32_t>(t), flags, v);
    auto replies = executor.collect();

    // The replies certify the iterate the round started from (t - 1).
    RoundScalars s = certify(problem, v, replies, t - 1);
    if (config.trace_every > 0 && (t - 1) % config.trace_every == 0)
      out.trace.push_back({t - 1, sim_now, s.objective_a, s.objective_b,
                           s.gap, bytes_cum, s.theta});

    for (const auto& r : replies) {
      if (r.delta_v.size() != d)
        throw contract_error("engine: worker delta-v has wrong dimension");
      for (std::size_t j = 0; j < d; ++j)
        v[j] += config.gamma * r.delta_v[j];
    }
    for (double x : v)
      if (!std::isfinite(x))
        throw numerical_error("round " + std::to_string(t) +
                              ": shared vector diverged");

    bytes_cum += round_bytes(K, d);
    sim_now += config.sim_comm_seconds +
               config.sim_step_seconds * static_cast<double>(s.steps_max);

    if (tol_active && s.gap <= tol) {
      ++t;
      break;
    }
  }
  out.rounds = std::min<std::size_t>(t - 1, config.max_rounds);

  // One eval-only exchange certifies the iterate the loop ended on.
  RoundFlags eval_flags;
  eval_flags.eval_only = true;
  executor.broadcast(static_cast<std::uint32_t>(out.rounds + 1), eval_flags,
                     v);
  auto replies = executor.collect();
  RoundScalars s = certify(problem, v, replies, out.rounds);
  out.trace.push_back({out.rounds, sim_now, s.objective_a, s.objective_b,
                       s.gap, bytes_cum, s.theta});
  out.final_gap =
      GapValue{s.gap, s.raw, s.objective_a, s.objective_b};
  out.bytes_total = bytes_cum + eval_round_bytes(K, d);
  out.sim_seconds = sim_now;

  out.alpha = executor.fetch_alpha(AlphaKind::last);
  if (config.averaging_window > 0)
    out.averaged_alpha = executor.fetch_alpha(AlphaKind::averaged);
  out.v = std::move(v);

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    wall_start)
          .count();
  return out;
}

InputSolveOutcome solve_input(const InputProblem& input, const Dataset& data,
                              std::size_t k_blocks, const EngineConfig& config,
                              std::optional<Variant> variant_override,
                              std::uint64_t partition_seed,
                              const BuildOptions& build) {
  CaseVariant cv = choose_variant(input, data.n_features(), data.n_examples());
  Variant variant = variant_override.value_or(cv.variant);
  ProblemInstance instance = build_instance(input, data, variant, build);

  Partition partition =
      Partition::balanced(instance.dim_partitioned(),
                          static_cast<std::uint32_t>(k_blocks),
                          partition_seed);
  auto executor = make_thread_executor(instance, partition, config);
  SolveResult run = run_cocoa(instance, partition, *executor, config);
  executor->shutdown();

  InputSolveOutcome out;
  out.variant = variant;
  out.problem_case = cv.problem_case;
  if (variant == Variant::primal) {
    out.model = run.alpha;
  } else {
    out.model = map_w(instance, run.v);
  }
  out.run = std::move(run);
  return out;
}

}  // namespace dcopt
