#include "dcopt/subproblem.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "dcopt/error.hpp"

namespace dcopt {

void SubproblemView::validate() const {
  if (!columns || !separable || !smooth)
    throw contract_error("subproblem view: missing pieces");
  if (v.size() != columns->rows() || w.size() != columns->rows())
    throw contract_error("subproblem view: shared-vector length != rows");
  if (alpha_block.size() != columns->cols() ||
      separable->size() != columns->cols())
    throw contract_error("subproblem view: block length mismatch");
  if (!(gamma > 0) || gamma > 1)
    throw std::invalid_argument("subproblem view: gamma outside (0,1]");
  if (sigma_prime < gamma)
    throw std::invalid_argument("subproblem view: sigma' below gamma");
  if (!(tau > 0)) throw std::invalid_argument("subproblem view: tau <= 0");
}

double subproblem_value(const SubproblemView& view,
                        std::span<const double> delta) {
  if (delta.size() != view.columns->cols())
    throw contract_error("subproblem_value: delta not on this block");
  std::vector<double> u = view.columns->matvec(delta);
  double lin = 0, sq = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    lin += view.w[j] * u[j];
    sq += u[j] * u[j];
  }
  double gsum = 0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    gsum += view.separable->value(i, view.alpha_block[i] + delta[i]);
    if (std::isinf(gsum)) return gsum;
  }
  return view.smooth->value(view.v) / static_cast<double>(view.k_blocks) +
         lin + view.sigma_prime / (2.0 * view.tau) * sq + gsum;
}

double safe_sigma_prime(double gamma, std::size_t k_blocks) {
  if (!(gamma > 0) || gamma > 1)
    throw std::invalid_argument("safe_sigma_prime: gamma outside (0,1]");
  if (k_blocks < 1) throw std::invalid_argument("safe_sigma_prime: K < 1");
  return gamma * static_cast<double>(k_blocks);
}

SigmaEstimate estimate_sigma_min(const ColumnMatrix& matrix,
                                 const Partition& partition, double gamma,
                                 std::size_t iterations, std::uint64_t seed) {
  if (!(gamma > 0) || gamma > 1)
    throw std::invalid_argument("estimate_sigma_min: gamma outside (0,1]");
  partition.validate(matrix.cols());
  const std::size_t d = matrix.rows();
  const std::size_t k_blocks = partition.k_blocks;

  // Orthonormal basis per block: the Rayleigh quotient
  //   |A alpha|^2 / sum_k |A_k alpha_k|^2
  // becomes |sum_k Q_k z_k|^2 / sum_k |z_k|^2 in coefficient space, which a
  // plain power iteration maximizes.
  std::vector<Eigen::MatrixXd> bases;
  std::size_t total_rank = 0;
  for (const auto& block : partition.blocks) {
    Eigen::MatrixXd dense(d, block.size());
    dense.setZero();
    for (std::size_t j = 0; j < block.size(); ++j)
      for (const auto& e : matrix.column(block[j]))
        dense(e.row, static_cast<Eigen::Index>(j)) = e.value;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dense);
    auto rank = qr.rank();
    if (rank > 0) {
      Eigen::MatrixXd thin_q =
          qr.householderQ() * Eigen::MatrixXd::Identity(d, rank);
      bases.push_back(std::move(thin_q));
      total_rank += static_cast<std::size_t>(rank);
    } else {
      bases.emplace_back(d, 0);
    }
  }
  if (total_rank == 0)
    throw numerical_error("estimate_sigma_min: matrix has no nonzero columns");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double ratio = 0;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 10)
      throw numerical_error(
          "estimate_sigma_min: start vector degenerate after 10 retries");
    std::vector<Eigen::VectorXd> z(k_blocks);
    double norm_sq = 0;
    for (std::size_t k = 0; k < k_blocks; ++k) {
      z[k] = Eigen::VectorXd(bases[k].cols());
      for (Eigen::Index t = 0; t < z[k].size(); ++t) z[k][t] = gauss(rng);
      norm_sq += z[k].squaredNorm();
    }
    double scale = 1.0 / std::sqrt(norm_sq);
    for (auto& zk : z) zk *= scale;

    bool degenerate = false;
    double prev = 0;
    ratio = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
      for (std::size_t k = 0; k < k_blocks; ++k)
        if (z[k].size() > 0) s += bases[k] * z[k];
      ratio = s.squaredNorm();  // Rayleigh quotient, |z| = 1
      if (ratio < 1e-14) {
        degenerate = true;
        break;
      }
      double next_sq = 0;
      for (std::size_t k = 0; k < k_blocks; ++k) {
        if (z[k].size() == 0) continue;
        z[k] = bases[k].transpose() * s;
        next_sq += z[k].squaredNorm();
      }
      double inv = 1.0 / std::sqrt(next_sq);
      for (auto& zk : z) zk *= inv;
      if (it > 0 && std::abs(ratio - prev) <= 1e-8 * std::abs(ratio)) break;
      prev = ratio;
    }
    if (!degenerate) break;
  }
  return SigmaEstimate{gamma * ratio, safe_sigma_prime(gamma, k_blocks),
                       k_blocks, gamma};
}

Lemma1Result lemma1_check(const ProblemInstance& problem,
                          const Partition& partition,
                          std::span<const double> alpha,
                          const std::vector<std::vector<double>>& deltas,
                          double gamma, double sigma_prime) {
  partition.validate(problem.matrix.cols());
  if (deltas.size() != partition.k_blocks)
    throw contract_error("lemma1_check: one delta vector per block required");
  if (alpha.size() != problem.matrix.cols())
    throw contract_error("lemma1_check: alpha length mismatch");

  std::vector<double> v = problem.matrix.matvec(alpha);
  std::vector<double> w = problem.smooth.gradient(v);
  double obj_at_alpha = objective_a(problem, alpha, v);

  double sum_g = 0;
  std::vector<double> moved(alpha.begin(), alpha.end());
  for (std::size_t k = 0; k < partition.k_blocks; ++k) {
    const auto& block = partition.blocks[k];
    if (deltas[k].size() != block.size())
      throw contract_error("lemma1_check: delta length != block size");
    ColumnMatrix local = problem.matrix.select_columns(block);
    SeparableTerm sliced = problem.separable.slice(block);
    std::vector<double> alpha_block(block.size());
    for (std::size_t j = 0; j < block.size(); ++j)
      alpha_block[j] = alpha[block[j]];
    SubproblemView view{v,
                        w,
                        &local,
                        alpha_block,
                        &sliced,
                        &problem.smooth,
                        sigma_prime,
                        problem.smooth.tau(),
                        gamma,
                        partition.k_blocks};
    sum_g += subproblem_value(view, deltas[k]);
    for (std::size_t j = 0; j < block.size(); ++j)
      moved[block[j]] += gamma * deltas[k][j];
  }

  Lemma1Result out;
  out.lhs = objective_a(problem, moved);
  out.rhs = (1.0 - gamma) * obj_at_alpha + gamma * sum_g;
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

}  // namespace dcopt
