#include "dcopt/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcopt/error.hpp"

namespace dcopt {

double coordinate_step(const SubproblemView& view, std::size_t i,
                       std::span<double> delta, std::span<double> delta_v) {
  const ColumnMatrix& cols = *view.columns;
  if (i >= cols.cols()) throw contract_error("coordinate_step: i not in block");
  double ratio = view.sigma_prime / view.tau;
  double quad = ratio * cols.column_sqnorm(i);
  double lin_raw = cols.column_dot(i, view.w) +
                   ratio * cols.column_dot(i, delta_v);
  double current = view.alpha_block[i] + delta[i];
  double target =
      view.separable->argmin_quadratic(i, quad, quad * current - lin_raw);
  double change = target - current;
  if (change != 0.0) {
    delta[i] += change;
    cols.add_scaled_column(i, change, delta_v);
  }
  return delta[i];
}

static LocalResult solve_loop(const SubproblemView& view,
                              const LocalSolverConfig& config,
                              std::mt19937_64& rng) {
  if (config.passes_H < 1)
    throw std::invalid_argument("local solver: passes_H < 1");
  const std::size_t n = view.columns->cols();
  LocalResult result;
  result.delta_block.assign(n, 0.0);
  result.delta_v.assign(view.columns->rows(), 0.0);
  if (n == 0) return result;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double before = config.check_monotone ? subproblem_value(view, result.delta_block)
                                        : 0.0;
  for (std::size_t epoch = 0; epoch < config.passes_H; ++epoch) {
    if (config.shuffle) {
      std::shuffle(order.begin(), order.end(), rng);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& idx : order) idx = pick(rng);
    }
    for (std::size_t idx : order) {
      coordinate_step(view, idx, result.delta_block, result.delta_v);
      ++result.steps_taken;
      if (config.check_monotone) {
        double after = subproblem_value(view, result.delta_block);
        double slack = 1e-12 * std::max(1.0, std::abs(before));
        if (after > before + slack)
          throw numerical_error("local solver: subproblem value increased");
        before = after;
      }
    }
  }
  return result;
}

LocalResult run_local_solver(const SubproblemView& view,
                             const LocalSolverConfig& config,
                             std::mt19937_64& rng) {
  return solve_loop(view, config, rng);
}

LocalResult run_local_solver(const SubproblemView& view,
                             const LocalSolverConfig& config) {
  std::mt19937_64 rng(config.rng_seed);
  return solve_loop(view, config, rng);
}

double measure_theta(const SubproblemView& view, const LocalResult& result,
                     std::size_t oracle_passes) {
  LocalSolverConfig oracle;
  oracle.passes_H = std::max<std::size_t>(oracle_passes, 1);
  oracle.rng_seed = 0x5eed0ac;  // fixed: the oracle is not part of the run
  LocalResult best = run_local_solver(view, oracle);

  std::vector<double> zero(view.columns->cols(), 0.0);
  double at_zero = subproblem_value(view, zero);
  double at_result = subproblem_value(view, result.delta_block);
  double at_best = subproblem_value(view, best.delta_block);
  double denom = at_zero - at_best;
  if (denom < 1e-14) return 0.0;
  return std::clamp((at_result - at_best) / denom, 0.0, 1.0);
}

}  // namespace dcopt
