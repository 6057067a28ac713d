#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcopt/baselines.hpp"
#include "dcopt/engine.hpp"
#include "dcopt/libsvm.hpp"
#include "dcopt/problem.hpp"
#include "dcopt/synth.hpp"

namespace dcopt {

// One self-contained JSON document drives everything; the schema is
// documented in the README. CLI flags override fields before parsing.

enum class ProblemKind : std::uint8_t {
  lasso,
  elastic_net,
  ridge,
  svm_hinge,
  absdev,
  logistic_l1,
  logistic_l2,
};

struct ProblemSelect {
  ProblemKind kind = ProblemKind::lasso;
  double lambda = 0.1;
  double eta = 0.5;             // elastic-net mix
  double smoothing_delta = 0;   // adds delta/2 |u|^2 to a pure-L1 penalty
};

InputProblem make_input(const ProblemSelect& select);
const char* to_string(ProblemKind k);

enum class SweepAxis : std::uint8_t { none, lambda, eta, passes, delta };

struct ExperimentConfig {
  ProblemSelect problem;
  // exactly one data source
  std::optional<std::string> data_path;
  std::optional<SynthSpec> synth;
  bool normalize = false;  // scale data columns of norm > 1 down to norm 1

  std::size_t k_blocks = 1;
  std::optional<Variant> variant;  // empty = auto
  std::uint64_t partition_seed = 1;
  EngineConfig engine;

  std::vector<std::string> solvers{"cocoa"};  // cocoa | prox-gd | minibatch-cd | admm
  BaselineConfig baseline;

  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_values;

  bool compute_reference = false;  // adds the subopt column + manifest entry
  std::string output_dir = ".";
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_example();  // documented schema, valid JSON

struct RunSummary {
  std::string solver;
  std::string setting;  // e.g. "H=10"; "run" when not sweeping
  Variant variant = Variant::primal;
  std::string trace_file;
  double final_objective = 0;   // input-space objective of the model
  double base_objective = 0;    // same, with smoothing_delta stripped
  double final_gap = 0;
  std::size_t rounds = 0;
  bool reached_tolerance = false;
  std::uint64_t bytes = 0;
  double sim_seconds = 0;
  double wall_seconds = 0;
  double sparsity = 0;  // fraction of exact zeros in the model
  std::optional<double> reference_objective;  // mapped O_A at the reference
};

struct ExperimentReport {
  std::vector<RunSummary> runs;
  std::string manifest_json;  // also written to <output_dir>/manifest.json
  std::string manifest_path;
};

// Runs every solver at every sweep setting, writes one trace CSV per run plus
// manifest.json into config.output_dir.
ExperimentReport run_experiment(const ExperimentConfig& config);

// The high-precision reference protocol: K=1, H=10^4 local passes, stop at
// gap <= 1e-12. Returns the mapped objective_a at the solution.
double reference_objective(const InputProblem& input, const Dataset& data,
                           Variant variant, std::uint64_t seed = 1);

// Fraction of exact zeros.
double model_sparsity(std::span<const double> model);

Dataset load_experiment_data(const ExperimentConfig& config);

}  // namespace dcopt
