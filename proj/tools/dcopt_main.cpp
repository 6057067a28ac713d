// Command-line driver: solve / sweep / diag-sigma / diag-theta / serve-worker.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcopt/baselines.hpp"
#include "dcopt/engine.hpp"
#include "dcopt/error.hpp"
#include "dcopt/experiment.hpp"
#include "dcopt/local_solver.hpp"
#include "dcopt/subproblem.hpp"
#include "dcopt/tcp.hpp"
#include "dcopt/thread_executor.hpp"
#include "dcopt/trace.hpp"
#include "dcopt/wire.hpp"
#include "dcopt/worker.hpp"

namespace {

using dcopt::Orientation;
using nlohmann::json;

// All experiment-shaped subcommands share one flag set; flags override the
// config file field for field.
struct CommonFlags {
  std::string config_path;

  std::string problem_kind;
  std::optional<double> lambda, eta, delta;

  std::string data_path;
  bool normalize = false;
  std::optional<std::size_t> synth_rows, synth_cols;
  std::optional<double> synth_density, synth_noise, synth_sparsity;
  std::optional<std::uint64_t> synth_seed;
  bool synth_classification = false;

  std::optional<std::size_t> k_blocks;
  std::string variant;
  std::optional<std::uint64_t> partition_seed;

  std::optional<double> gamma, sigma_prime, gap_tolerance;
  std::optional<std::size_t> max_rounds, passes, trace_every, avg_window,
      theta_every;
  std::optional<std::uint64_t> seed;
  bool no_shuffle = false;
  bool check_monotone = false;
  std::optional<double> sim_comm, sim_step;

  std::vector<std::string> solvers;
  std::optional<double> step, beta, rho;
  std::optional<std::size_t> batch, inner_passes;
  bool vary_rho = false;

  std::string sweep_axis;
  std::vector<double> sweep_values;

  bool reference = false;
  std::string output_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config JSON file");

  cmd->add_option("--problem", f.problem_kind,
                  "lasso|elastic-net|ridge|svm-hinge|absdev|logistic-l1|logistic-l2");
  cmd->add_option("--lambda", f.lambda, "regularization strength");
  cmd->add_option("--eta", f.eta, "elastic-net L1 fraction");
  cmd->add_option("--delta", f.delta, "L1 smoothing strength");

  cmd->add_option("--data", f.data_path, "LIBSVM file (.gz supported)");
  cmd->add_flag("--normalize", f.normalize, "scale long columns to unit norm");
  cmd->add_option("--synth-rows", f.synth_rows);
  cmd->add_option("--synth-cols", f.synth_cols);
  cmd->add_option("--synth-density", f.synth_density);
  cmd->add_option("--synth-noise", f.synth_noise);
  cmd->add_option("--synth-seed", f.synth_seed);
  cmd->add_option("--synth-model-sparsity", f.synth_sparsity);
  cmd->add_flag("--synth-classification", f.synth_classification);

  cmd->add_option("-k,--k-blocks", f.k_blocks, "number of blocks/workers");
  cmd->add_option("--variant", f.variant, "auto|primal|dual");
  cmd->add_option("--partition-seed", f.partition_seed);

  cmd->add_option("--gamma", f.gamma, "aggregation parameter in (0,1]");
  cmd->add_option("--sigma-prime", f.sigma_prime,
                  "subproblem safety parameter (default gamma*K)");
  cmd->add_option("--rounds", f.max_rounds, "round budget");
  cmd->add_option("--gap-tol", f.gap_tolerance, "stop when gap <= this");
  cmd->add_option("-H,--passes", f.passes, "local epochs per round");
  cmd->add_flag("--no-shuffle", f.no_shuffle,
                "i.i.d. coordinate draws instead of per-epoch permutations");
  cmd->add_flag("--check-monotone", f.check_monotone,
                "assert the local objective never increases");
  cmd->add_option("--seed", f.seed, "base rng seed");
  cmd->add_option("--trace-every", f.trace_every);
  cmd->add_option("--avg-window", f.avg_window,
                  "average the entering iterates of the last W rounds");
  cmd->add_option("--theta-every", f.theta_every,
                  "measure the local solve quality every N rounds");
  cmd->add_option("--sim-comm", f.sim_comm, "simulated seconds per round");
  cmd->add_option("--sim-step", f.sim_step,
                  "simulated seconds per coordinate step");

  cmd->add_option("--solvers", f.solvers,
                  "cocoa|prox-gd|minibatch-cd|admm (repeatable)")
      ->delimiter(',');
  cmd->add_option("--step", f.step, "prox-gd step (0 = auto)");
  cmd->add_option("--batch", f.batch, "minibatch-cd batch size");
  cmd->add_option("--beta", f.beta, "minibatch-cd update scale");
  cmd->add_option("--rho", f.rho, "admm penalty (0 = tau/K)");
  cmd->add_option("--inner-passes", f.inner_passes, "admm block epochs");
  cmd->add_flag("--vary-rho", f.vary_rho, "residual-balancing admm penalty");

  cmd->add_option("--axis", f.sweep_axis, "sweep axis: lambda|eta|H|delta");
  cmd->add_option("--values", f.sweep_values, "sweep values")->delimiter(',');

  cmd->add_flag("--reference", f.reference,
                "compute the high-precision reference and subopt column");
  cmd->add_option("-o,--out", f.output_dir, "output directory");
}

json load_config_json(const CommonFlags& f) {
  json j;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw std::runtime_error("cannot open " + f.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    j = json::parse(ss.str());
  } else {
    j = json::object();
  }
  return j;
}

json merge_flags(const CommonFlags& f, bool want_sweep,
                 bool require_problem = true) {
  json j = load_config_json(f);

  if (!f.problem_kind.empty()) j["problem"]["kind"] = f.problem_kind;
  if (!j.contains("problem") || !j["problem"].contains("kind")) {
    if (require_problem)
      throw std::runtime_error("no problem kind given (--problem or config)");
    j["problem"]["kind"] = "lasso";  // data-level diagnostics don't care
  }
  if (f.lambda) j["problem"]["lambda"] = *f.lambda;
  if (f.eta) j["problem"]["eta"] = *f.eta;
  if (f.delta) j["problem"]["smoothing_delta"] = *f.delta;

  if (!j.contains("data")) j["data"] = json::object();
  if (!f.data_path.empty()) {
    j["data"].erase("synth");
    j["data"]["path"] = f.data_path;
  }
  bool any_synth = f.synth_rows || f.synth_cols || f.synth_density ||
                   f.synth_noise || f.synth_seed || f.synth_sparsity ||
                   f.synth_classification;
  if (any_synth && f.data_path.empty()) j["data"].erase("path");
  if (any_synth && !j["data"].contains("synth"))
    j["data"]["synth"] = json::object();
  if (f.synth_rows) j["data"]["synth"]["rows"] = *f.synth_rows;
  if (f.synth_cols) j["data"]["synth"]["cols"] = *f.synth_cols;
  if (f.synth_density) j["data"]["synth"]["density"] = *f.synth_density;
  if (f.synth_noise) j["data"]["synth"]["noise"] = *f.synth_noise;
  if (f.synth_seed) j["data"]["synth"]["seed"] = *f.synth_seed;
  if (f.synth_sparsity)
    j["data"]["synth"]["model_sparsity"] = *f.synth_sparsity;
  if (f.synth_classification) j["data"]["synth"]["classification"] = true;
  if (f.normalize) j["data"]["normalize"] = true;
  if (!j.contains("data"))
    throw std::runtime_error("no data source given (--data/--synth-* or config)");

  if (f.k_blocks) j["k_blocks"] = *f.k_blocks;
  if (!f.variant.empty()) j["variant"] = f.variant;
  if (f.partition_seed) j["partition_seed"] = *f.partition_seed;

  if (f.gamma) j["engine"]["gamma"] = *f.gamma;
  if (f.sigma_prime) j["engine"]["sigma_prime"] = *f.sigma_prime;
  if (f.max_rounds) j["engine"]["max_rounds"] = *f.max_rounds;
  if (f.gap_tolerance) j["engine"]["gap_tolerance"] = *f.gap_tolerance;
  if (f.passes) j["engine"]["passes_H"] = *f.passes;
  if (f.no_shuffle) j["engine"]["shuffle"] = false;
  if (f.check_monotone) j["engine"]["check_monotone"] = true;
  if (f.seed) j["engine"]["seed"] = *f.seed;
  if (f.trace_every) j["engine"]["trace_every"] = *f.trace_every;
  if (f.avg_window) j["engine"]["averaging_window"] = *f.avg_window;
  if (f.theta_every) j["engine"]["measure_theta_every"] = *f.theta_every;
  if (f.sim_comm) j["engine"]["sim_comm_seconds"] = *f.sim_comm;
  if (f.sim_step) j["engine"]["sim_step_seconds"] = *f.sim_step;

  if (!f.solvers.empty()) j["solvers"] = f.solvers;
  if (f.step) j["baseline"]["step"] = *f.step;
  if (f.batch) j["baseline"]["batch_size"] = *f.batch;
  if (f.beta) j["baseline"]["beta"] = *f.beta;
  if (f.rho) j["baseline"]["rho"] = *f.rho;
  if (f.inner_passes) j["baseline"]["inner_passes"] = *f.inner_passes;
  if (f.vary_rho) j["baseline"]["vary_rho"] = true;

  if (!f.sweep_axis.empty()) {
    j.erase("sweep");
    j["sweep"][f.sweep_axis] = f.sweep_values;
  }
  if (want_sweep && !j.contains("sweep"))
    throw std::runtime_error("sweep needs an axis (--axis/--values or config)");
  if (!want_sweep) j.erase("sweep");

  if (f.reference) j["reference"] = true;
  if (!f.output_dir.empty()) j["output_dir"] = f.output_dir;
  return j;
}

dcopt::TcpEndpoint parse_endpoint(const std::string& s) {
  auto pos = s.rfind(':');
  if (pos == std::string::npos || pos + 1 >= s.size())
    throw std::runtime_error("endpoint must be host:port, got '" + s + "'");
  int port = std::stoi(s.substr(pos + 1));
  if (port < 1 || port > 65535)
    throw std::runtime_error("bad port in '" + s + "'");
  return {s.substr(0, pos), static_cast<std::uint16_t>(port)};
}

// solve over remote workers: cocoa only, engine driven directly.
int run_solve_tcp(const dcopt::ExperimentConfig& config,
                  const std::vector<std::string>& worker_specs,
                  bool ship_by_path) {
  using namespace dcopt;
  for (const auto& s : config.solvers)
    if (s != "cocoa")
      throw std::runtime_error("--workers runs the cocoa solver only");
  if (ship_by_path && !config.data_path)
    throw std::runtime_error("--ship path requires --data");

  Dataset data = load_experiment_data(config);
  InputProblem input = make_input(config.problem);
  CaseVariant cv = choose_variant(input, data.n_features(), data.n_examples());
  Variant variant = config.variant.value_or(cv.variant);
  ProblemInstance instance = build_instance(input, data, variant);
  Partition partition = Partition::balanced(
      instance.dim_partitioned(), static_cast<std::uint32_t>(config.k_blocks),
      config.partition_seed);
  if (worker_specs.size() != config.k_blocks)
    throw std::runtime_error("need exactly k_blocks worker endpoints");

  std::vector<TcpEndpoint> endpoints;
  endpoints.reserve(worker_specs.size());
  for (const auto& s : worker_specs) endpoints.push_back(parse_endpoint(s));

  auto inits = make_worker_inits(
      instance, partition, config.engine.gamma,
      config.engine.effective_sigma(partition.k_blocks), config.engine.local,
      averaging_start_round(config.engine),
      config.engine.theta_oracle_passes);
  std::vector<AssignPayload> assigns;
  assigns.reserve(inits.size());
  Orientation orient = variant == Variant::primal
                           ? Orientation::features_as_columns
                           : Orientation::samples_as_columns;
  for (const auto& init : inits)
    assigns.push_back(ship_by_path
                          ? make_assign_by_path(init, *config.data_path, orient)
                          : make_assign(init));

  auto executor = make_tcp_executor(endpoints, std::move(assigns));
  SolveResult run = run_cocoa(instance, partition, *executor, config.engine);

  std::vector<double> model = variant == Variant::primal
                                  ? run.alpha
                                  : map_w(instance, run.v);
  std::filesystem::create_directories(config.output_dir);
  std::string trace_path =
      (std::filesystem::path(config.output_dir) / "cocoa.csv").string();
  write_text_file(trace_path, trace_csv(run.trace));

  json out = {{"solver", "cocoa"},
              {"variant", to_string(variant)},
              {"workers", worker_specs},
              {"trace", trace_path},
              {"final_objective", input_objective(input, data, model)},
              {"final_gap", run.final_gap.gap},
              {"rounds", run.rounds},
              {"bytes", run.bytes_total},
              {"bytes_sent", executor->bytes_sent()},
              {"bytes_received", executor->bytes_received()},
              {"sim_seconds", run.sim_seconds},
              {"wall_seconds", run.wall_seconds},
              {"sparsity", model_sparsity(model)}};
  executor->shutdown();
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int run_solve(const CommonFlags& flags,
              const std::vector<std::string>& workers, bool ship_by_path) {
  dcopt::ExperimentConfig config =
      dcopt::parse_experiment_config(merge_flags(flags, false).dump());
  if (!workers.empty()) return run_solve_tcp(config, workers, ship_by_path);
  dcopt::ExperimentReport report = dcopt::run_experiment(config);
  std::cout << report.manifest_json;
  return 0;
}

int run_sweep(const CommonFlags& flags) {
  dcopt::ExperimentConfig config =
      dcopt::parse_experiment_config(merge_flags(flags, true).dump());
  dcopt::ExperimentReport report = dcopt::run_experiment(config);
  std::cout << report.manifest_json;
  return 0;
}

int run_diag_sigma(const CommonFlags& flags, const std::string& orientation,
                   std::size_t iterations) {
  using namespace dcopt;
  ExperimentConfig config =
      parse_experiment_config(merge_flags(flags, false, false).dump());
  Dataset data = load_experiment_data(config);
  Orientation want = orientation == "samples"
                         ? Orientation::samples_as_columns
                         : Orientation::features_as_columns;
  Dataset oriented = reorient(data, want);
  Partition partition = Partition::balanced(
      oriented.matrix.cols(), static_cast<std::uint32_t>(config.k_blocks),
      config.partition_seed);
  double gamma = config.engine.gamma;
  SigmaEstimate est =
      estimate_sigma_min(oriented.matrix, partition, gamma, iterations);
  json out = {{"sigma_min_estimate", est.sigma_min_estimate},
              {"safe_bound", est.safe_bound},
              {"k_blocks", est.k_blocks},
              {"gamma", est.gamma}};
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int run_diag_theta(const CommonFlags& flags, std::size_t repeats,
                   std::size_t oracle_passes) {
  using namespace dcopt;
  ExperimentConfig config =
      parse_experiment_config(merge_flags(flags, false).dump());
  Dataset data = load_experiment_data(config);
  InputProblem input = make_input(config.problem);
  CaseVariant cv = choose_variant(input, data.n_features(), data.n_examples());
  Variant variant = config.variant.value_or(cv.variant);
  ProblemInstance instance = build_instance(input, data, variant);
  Partition partition = Partition::balanced(
      instance.dim_partitioned(), static_cast<std::uint32_t>(config.k_blocks),
      config.partition_seed);

  const std::size_t d = instance.dim_shared();
  std::vector<double> v(d, 0.0), w(d, 0.0);
  instance.smooth.gradient(v, w);
  double sigma = config.engine.effective_sigma(partition.k_blocks);

  json blocks = json::array();
  double theta_min = 1, theta_max = 0, theta_sum = 0;
  std::size_t measured = 0;
  for (std::uint32_t k = 0; k < partition.k_blocks; ++k) {
    ColumnMatrix local = instance.matrix.select_columns(partition.blocks[k]);
    SeparableTerm sliced = instance.separable.slice(partition.blocks[k]);
    std::vector<double> alpha(partition.block_size(k), 0.0);
    SubproblemView view{v, w, &local, alpha, &sliced, &instance.smooth,
                        sigma, instance.smooth.tau(), config.engine.gamma,
                        partition.k_blocks};
    json per_seed = json::array();
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      LocalSolverConfig solver = config.engine.local;
      solver.rng_seed = config.engine.local.rng_seed + rep;
      LocalResult res = run_local_solver(view, solver);
      double theta = measure_theta(view, res, oracle_passes);
      per_seed.push_back(theta);
      theta_min = std::min(theta_min, theta);
      theta_max = std::max(theta_max, theta);
      theta_sum += theta;
      ++measured;
    }
    blocks.push_back({{"block", k}, {"theta", per_seed}});
  }
  json out = {{"passes_H", config.engine.local.passes_H},
              {"repeats", repeats},
              {"k_blocks", partition.k_blocks},
              {"variant", to_string(variant)},
              {"theta_min", theta_min},
              {"theta_mean", theta_sum / static_cast<double>(measured)},
              {"theta_max", theta_max},
              {"blocks", blocks}};
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int run_serve_worker(const std::string& listen, const std::string& data_path,
                     bool normalize) {
  using namespace dcopt;
  auto pos = listen.rfind(':');
  if (pos == std::string::npos)
    throw std::runtime_error("--listen must be host:port");
  std::string host = listen.substr(0, pos);
  int port = std::stoi(listen.substr(pos + 1));

  Dataset data;
  const Dataset* preloaded = nullptr;
  if (!data_path.empty()) {
    data = load_libsvm_file(data_path, Orientation::features_as_columns);
    if (normalize) {
      data.scale_factors = data.matrix.normalize_columns();
      data.normalized = true;
    }
    preloaded = &data;
  }

  WorkerServer server(host, static_cast<std::uint16_t>(port));
  std::printf("listening on %s:%u\n", host.c_str(), server.port());
  std::fflush(stdout);
  server.serve_once(preloaded);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed primal-dual convex optimization toolkit"};
  app.require_subcommand(1);

  CommonFlags solve_flags, sweep_flags, sigma_flags, theta_flags;
  std::vector<std::string> workers;
  std::string ship_mode = "inline";

  CLI::App* solve = app.add_subcommand("solve", "run solvers once");
  add_common_flags(solve, solve_flags);
  solve->add_option("--workers", workers,
                    "remote worker endpoints host:port (k_blocks of them)")
      ->delimiter(',');
  solve->add_option("--ship", ship_mode,
                    "inline: send columns in ASSIGN; path: workers use --data");

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_common_flags(sweep, sweep_flags);

  CLI::App* diag_sigma =
      app.add_subcommand("diag-sigma", "estimate the partition's sigma_min");
  add_common_flags(diag_sigma, sigma_flags);
  std::string sigma_orientation = "features";
  std::size_t sigma_iterations = 100;
  diag_sigma->add_option("--orientation", sigma_orientation,
                         "features|samples as columns");
  diag_sigma->add_option("--iterations", sigma_iterations);

  CLI::App* diag_theta =
      app.add_subcommand("diag-theta", "measure local solve quality");
  add_common_flags(diag_theta, theta_flags);
  std::size_t theta_repeats = 5, theta_oracle = 200;
  diag_theta->add_option("--repeats", theta_repeats, "seeds per block");
  diag_theta->add_option("--oracle-passes", theta_oracle);

  CLI::App* serve = app.add_subcommand("serve-worker", "serve one worker");
  std::string listen = "127.0.0.1:0", serve_data;
  bool serve_normalize = false;
  serve->add_option("--listen", listen, "host:port (port 0 picks one)");
  serve->add_option("--data", serve_data, "preloaded LIBSVM file");
  serve->add_flag("--normalize", serve_normalize,
                  "match a coordinator that normalizes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return run_solve(solve_flags, workers, ship_mode == "path");
    if (sweep->parsed()) return run_sweep(sweep_flags);
    if (diag_sigma->parsed())
      return run_diag_sigma(sigma_flags, sigma_orientation, sigma_iterations);
    if (diag_theta->parsed())
      return run_diag_theta(theta_flags, theta_repeats, theta_oracle);
    if (serve->parsed())
      return run_serve_worker(listen, serve_data, serve_normalize);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
