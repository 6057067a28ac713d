#pragma once

#include <cstdint>
#include <vector>

#include "dcopt/libsvm.hpp"

namespace dcopt {

// Sparse Gaussian design with a planted sparse model; deterministic per seed.
struct SynthSpec {
  std::size_t rows = 100;  // examples
  std::size_t cols = 200;  // features
  double density = 0.1;
  double noise = 0.1;
  std::uint64_t seed = 1;
  bool classification = false;   // labels become signs
  double model_sparsity = 0.1;   // fraction of nonzero planted coordinates
};

struct SynthData {
  Dataset data;  // features as columns, globally scaled so every column of
                 // either orientation has norm <= 1
  std::vector<double> planted_model;
};

SynthData synth_dataset(const SynthSpec& spec);

}  // namespace dcopt
