#include "dcopt/worker.hpp"

#include "dcopt/error.hpp"

namespace dcopt {

WorkerCore::WorkerCore(WorkerInit init)
    : init_(std::move(init)), rng_(init_.solver.rng_seed) {
  if (init_.columns.cols() != init_.separable.size() ||
      init_.columns.cols() != init_.index.size())
    throw contract_error("worker: block pieces disagree on size");
  if (init_.columns.rows() != init_.smooth.dim())
    throw contract_error("worker: smooth dim != matrix rows");
  alpha_.assign(init_.columns.cols(), 0.0);
  avg_accum_.assign(init_.columns.cols(), 0.0);
}

WorkerReply WorkerCore::process(std::uint32_t round_id, RoundFlags flags,
                                std::span<const double> v) {
  if (round_id <= last_round_)
    throw protocol_error("worker: round ids must be strictly increasing");
  last_round_ = round_id;
  if (v.size() != init_.columns.rows())
    throw contract_error("worker: shared vector length mismatch");

  std::vector<double> w = init_.smooth.gradient(v);

  WorkerReply reply;
  reply.worker_id = init_.worker_id;
  reply.g_sum = init_.separable.value_sum(alpha_);
  for (std::size_t i = 0; i < alpha_.size(); ++i)
    reply.conj_sum +=
        init_.separable.conjugate(i, -init_.columns.column_dot(i, w));

  if (init_.avg_start > 0 && round_id >= init_.avg_start) {
    for (std::size_t i = 0; i < alpha_.size(); ++i) avg_accum_[i] += alpha_[i];
    ++avg_count_;
  }

  if (flags.eval_only) return reply;

  SubproblemView view{v,
                      w,
                      &init_.columns,
                      alpha_,
                      &init_.separable,
                      &init_.smooth,
                      init_.sigma_prime,
                      init_.smooth.tau(),
                      init_.gamma,
                      init_.k_blocks};
  LocalResult local = run_local_solver(view, init_.solver, rng_);
  if (flags.measure_theta)
    reply.theta = measure_theta(view, local, init_.theta_oracle_passes);

  for (std::size_t i = 0; i < alpha_.size(); ++i)
    alpha_[i] += init_.gamma * local.delta_block[i];
  reply.steps = local.steps_taken;
  reply.delta_v = std::move(local.delta_v);
  return reply;
}

std::vector<double> WorkerCore::averaged_alpha() const {
  if (avg_count_ == 0) return alpha_;
  std::vector<double> out(avg_accum_);
  double inv = 1.0 / static_cast<double>(avg_count_);
  for (double& x : out) x *= inv;
  return out;
}

std::vector<WorkerInit> make_worker_inits(const ProblemInstance& problem,
                                          const Partition& partition,
                                          double gamma, double sigma_prime,
                                          const LocalSolverConfig& solver,
                                          std::uint32_t avg_start,
                                          std::uint32_t theta_oracle_passes) {
  problem.validate();
  partition.validate(problem.matrix.cols());
  std::vector<WorkerInit> inits;
  inits.reserve(partition.k_blocks);
  for (std::size_t k = 0; k < partition.k_blocks; ++k) {
    const auto& block = partition.blocks[k];
    WorkerInit init;
    init.worker_id = static_cast<std::uint32_t>(k);
    init.k_blocks = static_cast<std::uint32_t>(partition.k_blocks);
    init.gamma = gamma;
    init.sigma_prime = sigma_prime;
    init.solver = solver;
    init.solver.rng_seed = solver.rng_seed + 0x9e3779b9ULL * (k + 1);
    init.avg_start = avg_start;
    init.theta_oracle_passes = theta_oracle_passes;
    init.smooth = problem.smooth;
    init.separable = problem.separable.slice(block);
    init.columns = problem.matrix.select_columns(block);
    init.index = block;
    inits.push_back(std::move(init));
  }
  return inits;
}

}  // namespace dcopt
