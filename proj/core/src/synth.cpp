#include "dcopt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace dcopt {

SynthData synth_dataset(const SynthSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1)
    throw std::invalid_argument("synth: rows and cols must be >= 1");
  if (!(spec.density > 0) || spec.density > 1)
    throw std::invalid_argument("synth: density must be in (0, 1]");
  if (spec.noise < 0) throw std::invalid_argument("synth: negative noise");
  if (!(spec.model_sparsity > 0) || spec.model_sparsity > 1)
    throw std::invalid_argument("synth: model_sparsity must be in (0, 1]");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss;

  std::vector<SparseColumn> cols(spec.cols);
  for (std::size_t j = 0; j < spec.cols; ++j) {
    for (std::size_t r = 0; r < spec.rows; ++r) {
      if (unif(rng) >= spec.density) continue;
      double x = gauss(rng);
      if (x == 0.0) continue;  // no explicit zeros stored
      cols[j].push_back({static_cast<std::uint32_t>(r), x});
    }
  }

  // One global scale keeps the design faithful while bounding every column
  // norm in BOTH orientations by 1, so either variant mapping sees
  // normalized data.
  std::vector<double> row_sq(spec.rows, 0.0);
  double worst = 1.0;
  for (const auto& col : cols) {
    double sq = 0;
    for (const auto& e : col) {
      sq += e.value * e.value;
      row_sq[e.row] += e.value * e.value;
    }
    worst = std::max(worst, std::sqrt(sq));
  }
  for (double sq : row_sq) worst = std::max(worst, std::sqrt(sq));
  if (worst > 1.0)
    for (auto& col : cols)
      for (auto& e : col) e.value /= worst;

  std::vector<double> model(spec.cols, 0.0);
  std::size_t support =
      std::max<std::size_t>(1, std::llround(spec.model_sparsity *
                                            static_cast<double>(spec.cols)));
  support = std::min(support, spec.cols);
  std::vector<std::uint32_t> order(spec.cols);
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t s = 0; s < support; ++s) {
    double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
    model[order[s]] = sign * (1.0 + std::abs(gauss(rng)));
  }

  std::vector<double> labels(spec.rows, 0.0);
  for (std::size_t j = 0; j < spec.cols; ++j) {
    if (model[j] == 0.0) continue;
    for (const auto& e : cols[j]) labels[e.row] += e.value * model[j];
  }
  for (auto& y : labels) y += spec.noise * gauss(rng);
  if (spec.classification)
    for (auto& y : labels) y = y >= 0.0 ? 1.0 : -1.0;

  SynthData out;
  out.data.matrix = ColumnMatrix(spec.rows, std::move(cols));
  out.data.labels = std::move(labels);
  out.data.orientation = Orientation::features_as_columns;
  out.data.source = "synth(seed=" + std::to_string(spec.seed) + ")";
  out.data.normalized = true;
  out.data.scale_factors.assign(spec.cols, worst);
  out.planted_model = std::move(model);
  return out;
}

}  // namespace dcopt
