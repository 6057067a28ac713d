#include "dcopt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dcopt/error.hpp"
#include "dcopt/local_solver.hpp"

namespace dcopt {

const char* to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::prox_gd: return "prox-gd";
    case BaselineMethod::minibatch_cd: return "minibatch-cd";
    case BaselineMethod::admm: return "admm";
  }
  return "?";
}

double default_prox_gd_step(const ProblemInstance& problem,
                            std::uint64_t seed) {
  const std::size_t n = problem.dim_partitioned();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> z(n);
  for (auto& x : z) x = gauss(rng);
  double nz = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
  if (nz == 0) {
    z[0] = 1;
    nz = 1;
  }
  for (auto& x : z) x /= nz;
  for (int it = 0; it < 50; ++it) {
    std::vector<double> az = problem.matrix.matvec(z);
    std::vector<double> y = problem.matrix.transpose_matvec(az);
    double ny = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    if (ny < 1e-30) break;  // A is (numerically) zero
    for (std::size_t j = 0; j < n; ++j) z[j] = y[j] / ny;
  }
  std::vector<double> az = problem.matrix.matvec(z);
  double lambda_max =
      std::inner_product(az.begin(), az.end(), az.begin(), 0.0);
  if (lambda_max < 1e-14) return problem.smooth.tau();
  return problem.smooth.tau() / lambda_max;
}

std::vector<double> prox_gd_round(const ProblemInstance& problem,
                                  std::vector<double> alpha, double step) {
  if (step < 0) throw std::invalid_argument("prox-gd: negative step");
  if (step == 0) return alpha;
  std::vector<double> v = problem.matrix.matvec(alpha);
  std::vector<double> w = problem.smooth.gradient(v);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    double z = alpha[i] - step * problem.matrix.column_dot(i, w);
    alpha[i] = problem.separable.prox(i, z, step);
  }
  return alpha;
}

std::vector<double> minibatch_cd_round(const ProblemInstance& problem,
                                       std::vector<double> alpha,
                                       std::size_t b, double beta,
                                       std::mt19937_64& rng) {
  const std::size_t n = alpha.size();
  if (b < 1 || b > n)
    throw std::invalid_argument("minibatch-cd: batch size out of range");
  if (beta < 1 || beta > static_cast<double>(b))
    throw std::invalid_argument("minibatch-cd: beta must be in [1, b]");
  std::vector<double> v = problem.matrix.matvec(alpha);
  std::vector<double> w = problem.smooth.gradient(v);

  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < b; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }

  const double tau = problem.smooth.tau();
  const double scale = beta / static_cast<double>(b);
  std::vector<double> delta(b);
  for (std::size_t i = 0; i < b; ++i) {
    std::uint32_t j = idx[i];
    double quad = problem.matrix.column_sqnorm(j) / tau;
    double lin = quad * alpha[j] - problem.matrix.column_dot(j, w);
    delta[i] = problem.separable.argmin_quadratic(j, quad, lin) - alpha[j];
  }
  for (std::size_t i = 0; i < b; ++i) alpha[idx[i]] += scale * delta[i];
  return alpha;
}

AdmmState admm_init(const ProblemInstance& problem, const Partition& partition,
                    double rho) {
  if (!(rho > 0)) throw std::invalid_argument("admm: rho must be positive");
  partition.validate(problem.dim_partitioned());
  AdmmState s;
  s.rho = rho;
  s.alpha.assign(problem.dim_partitioned(), 0.0);
  s.w.assign(problem.dim_shared(), 0.0);
  s.u.assign(partition.k_blocks,
             std::vector<double>(problem.dim_shared(), 0.0));
  s.wk.assign(partition.k_blocks,
              std::vector<double>(problem.dim_shared(), 0.0));
  return s;
}

namespace {

// One pass of cyclic CD on  min_t  sum_i g_i(t_i) + c^T A t + 1/(2 rho) |A t|^2
// over the block's coordinates; r = A t is maintained by the caller.
void admm_block_epoch(const ProblemInstance& problem,
                      std::span<const std::uint32_t> block,
                      std::span<const double> c, double rho,
                      std::vector<double>& alpha, std::vector<double>& r) {
  for (std::uint32_t j : block) {
    double sq = problem.matrix.column_sqnorm(j);
    double quad = sq / rho;
    double cr = problem.matrix.column_dot(j, r);
    double cc = problem.matrix.column_dot(j, c);
    double lin = -cc - (cr - alpha[j] * sq) / rho;
    double t = problem.separable.argmin_quadratic(j, quad, lin);
    double change = t - alpha[j];
    if (change != 0.0) {
      problem.matrix.add_scaled_column(j, change, r);
      alpha[j] = t;
    }
  }
}

}  // namespace

void admm_round(const ProblemInstance& problem, const Partition& partition,
                AdmmState& state, std::size_t inner_passes, bool vary_rho) {
  if (inner_passes < 1)
    throw std::invalid_argument("admm: inner_passes must be >= 1");
  const std::size_t K = partition.k_blocks;
  const std::size_t d = problem.dim_shared();

  std::vector<double> c(d), r(d);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < d; ++j) c[j] = state.w[j] - state.u[k][j];
    std::fill(r.begin(), r.end(), 0.0);
    for (std::uint32_t j : partition.blocks[k])
      problem.matrix.add_scaled_column(j, state.alpha[j], r);
    for (std::size_t pass = 0; pass < inner_passes; ++pass)
      admm_block_epoch(problem, partition.blocks[k], c, state.rho,
                       state.alpha, r);
    for (std::size_t j = 0; j < d; ++j)
      state.wk[k][j] = c[j] + r[j] / state.rho;
  }

  std::vector<double> z(d, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < d; ++j) z[j] += state.wk[k][j] + state.u[k][j];
  for (auto& x : z) x /= static_cast<double>(K);

  std::vector<double> w_prev = state.w;
  problem.smooth.prox_conjugate(z, 1.0 / (state.rho * static_cast<double>(K)),
                                state.w);
  for (double x : state.w)
    if (!std::isfinite(x)) throw numerical_error("admm: consensus diverged");

  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < d; ++j)
      state.u[k][j] += state.wk[k][j] - state.w[j];

  if (vary_rho) {
    double r2 = 0;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < d; ++j) {
        double e = state.wk[k][j] - state.w[j];
        r2 += e * e;
      }
    double dw2 = 0;
    for (std::size_t j = 0; j < d; ++j) {
      double e = state.w[j] - w_prev[j];
      dw2 += e * e;
    }
    double r_norm = std::sqrt(r2);
    double s_norm =
        state.rho * std::sqrt(static_cast<double>(K)) * std::sqrt(dw2);
    if (r_norm > 10.0 * s_norm) {
      state.rho *= 2.0;
      for (auto& uk : state.u)
        for (auto& x : uk) x /= 2.0;
    } else if (s_norm > 10.0 * r_norm) {
      state.rho /= 2.0;
      for (auto& uk : state.u)
        for (auto& x : uk) x *= 2.0;
    }
  }
}

AdmmEquivalence admm_equivalence_check(const ProblemInstance& problem,
                                       const SubproblemView& view, double rho,
                                       std::size_t oracle_passes) {
  view.validate();
  if (!(rho > 0)) throw std::invalid_argument("admm: rho must be positive");
  const std::size_t nk = view.alpha_block.size();
  const std::size_t d = view.v.size();

  // Matched linear term: both routes minimize over the absolute block
  // variable t with c = w - (sigma'/tau) A_k alpha_k.
  std::vector<double> av = view.columns->matvec(view.alpha_block);
  std::vector<double> c(d);
  double cross = view.sigma_prime / view.tau;
  for (std::size_t j = 0; j < d; ++j) c[j] = view.w[j] - cross * av[j];

  AdmmEquivalence out;

  // admm route: deterministic cyclic CD on the block subproblem.
  {
    std::vector<double> t(view.alpha_block.begin(), view.alpha_block.end());
    std::vector<double> r(d, 0.0);
    for (std::size_t j = 0; j < nk; ++j)
      view.columns->add_scaled_column(j, t[j], r);
    for (std::size_t pass = 0; pass < oracle_passes; ++pass) {
      for (std::size_t j = 0; j < nk; ++j) {
        double sq = view.columns->column_sqnorm(j);
        double quad = sq / rho;
        double lin = -view.columns->column_dot(j, c) -
                     (view.columns->column_dot(j, r) - t[j] * sq) / rho;
        double next = view.separable->argmin_quadratic(j, quad, lin);
        double change = next - t[j];
        if (change != 0.0) {
          view.columns->add_scaled_column(j, change, r);
          t[j] = next;
        }
      }
    }
    out.minimizer_admm = std::move(t);
  }

  // cocoa route: the local solver on the same view, then t = alpha + delta.
  {
    LocalSolverConfig solver;
    solver.passes_H = oracle_passes;
    solver.rng_seed = 0x5eed0ac;
    solver.shuffle = true;
    LocalResult res = run_local_solver(view, solver);
    out.minimizer_cocoa.resize(nk);
    for (std::size_t j = 0; j < nk; ++j)
      out.minimizer_cocoa[j] = view.alpha_block[j] + res.delta_block[j];
  }

  out.max_abs_diff = 0;
  for (std::size_t j = 0; j < nk; ++j)
    out.max_abs_diff =
        std::max(out.max_abs_diff,
                 std::abs(out.minimizer_admm[j] - out.minimizer_cocoa[j]));
  return out;
}

BaselineResult run_baseline(const ProblemInstance& problem,
                            const Partition& partition,
                            const BaselineConfig& config) {
  problem.validate();
  partition.validate(problem.dim_partitioned());
  if (config.max_rounds < 1)
    throw std::invalid_argument("baseline: max_rounds must be >= 1");
  const std::size_t K = partition.k_blocks;
  const std::size_t d = problem.dim_shared();
  const std::size_t n = problem.dim_partitioned();

  double step = config.step;
  if (config.method == BaselineMethod::prox_gd) {
    double safe = default_prox_gd_step(problem, config.seed);
    if (step == 0) {
      step = safe;
    } else if (step > safe) {
      std::fprintf(stderr,
                   "warning: prox-gd step %g exceeds the tau/lambda_max "
                   "estimate %g; descent is not guaranteed\n",
                   step, safe);
    }
  }

  double rho = config.rho;
  if (config.method == BaselineMethod::admm && rho == 0)
    rho = problem.smooth.tau() / static_cast<double>(K);

  std::size_t block_max = 0;
  for (std::uint32_t k = 0; k < K; ++k)
    block_max = std::max(block_max, partition.block_size(k));

  // Simulated per-round work charge for the seconds column: the slowest
  // worker's coordinate count under a block-parallel reading of the method.
  double round_steps = 0;
  switch (config.method) {
    case BaselineMethod::prox_gd: round_steps = static_cast<double>(block_max); break;
    case BaselineMethod::minibatch_cd:
      round_steps = static_cast<double>(config.batch_size);
      break;
    case BaselineMethod::admm:
      round_steps =
          static_cast<double>(config.inner_passes) * static_cast<double>(block_max);
      break;
  }

  BaselineResult out;
  out.alpha.assign(n, 0.0);
  std::mt19937_64 rng(config.seed);
  AdmmState admm;
  if (config.method == BaselineMethod::admm)
    admm = admm_init(problem, partition, rho);

  std::uint64_t bytes_cum = 0;
  double sim_now = 0;
  const bool tol_active = std::isfinite(config.gap_tolerance);

  std::size_t t = 1;
  for (; t <= config.max_rounds; ++t) {
    GapValue gv = duality_gap(problem, out.alpha);
    if (!std::isfinite(gv.objective_a) || !std::isfinite(gv.objective_b))
      throw numerical_error("baseline: objective diverged at round " +
                            std::to_string(t - 1));
    if (config.trace_every > 0 && (t - 1) % config.trace_every == 0)
      out.trace.push_back({t - 1, sim_now, gv.objective_a, gv.objective_b,
                           gv.gap, bytes_cum,
                           std::numeric_limits<double>::quiet_NaN()});

    switch (config.method) {
      case BaselineMethod::prox_gd:
        out.alpha = prox_gd_round(problem, std::move(out.alpha), step);
        break;
      case BaselineMethod::minibatch_cd:
        out.alpha = minibatch_cd_round(problem, std::move(out.alpha),
                                       config.batch_size, config.beta, rng);
        break;
      case BaselineMethod::admm:
        admm_round(problem, partition, admm, config.inner_passes,
                   config.vary_rho);
        out.alpha = admm.alpha;
        break;
    }

    bytes_cum += round_bytes(K, d);
    sim_now += config.sim_comm_seconds + config.sim_step_seconds * round_steps;

    if (tol_active && gv.gap <= config.gap_tolerance) {
      ++t;
      break;
    }
  }
  out.rounds = std::min<std::size_t>(t - 1, config.max_rounds);

  GapValue gv = duality_gap(problem, out.alpha);
  out.trace.push_back({out.rounds, sim_now, gv.objective_a, gv.objective_b,
                       gv.gap, bytes_cum,
                       std::numeric_limits<double>::quiet_NaN()});
  out.final_gap = gv;
  out.bytes_total = bytes_cum + eval_round_bytes(K, d);
  out.sim_seconds = sim_now;
  out.rho_final = config.method == BaselineMethod::admm ? admm.rho : 0.0;
  return out;
}

}  // namespace dcopt
