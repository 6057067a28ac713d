#include "dcopt/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "json.hpp"

#include "dcopt/error.hpp"
#include "dcopt/trace.hpp"

namespace dcopt {

using nlohmann::json;

const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::lasso: return "lasso";
    case ProblemKind::elastic_net: return "elastic-net";
    case ProblemKind::ridge: return "ridge";
    case ProblemKind::svm_hinge: return "svm-hinge";
    case ProblemKind::absdev: return "absdev";
    case ProblemKind::logistic_l1: return "logistic-l1";
    case ProblemKind::logistic_l2: return "logistic-l2";
  }
  return "?";
}

InputProblem make_input(const ProblemSelect& s) {
  if (!(s.lambda > 0))
    throw std::invalid_argument("problem: lambda must be positive");
  if (s.smoothing_delta < 0)
    throw std::invalid_argument("problem: smoothing delta must be >= 0");
  InputProblem p;
  switch (s.kind) {
    case ProblemKind::lasso:
      p = InputProblem::lasso(s.lambda);
      break;
    case ProblemKind::elastic_net:
      if (s.eta < 0 || s.eta > 1)
        throw std::invalid_argument("problem: eta must be in [0, 1]");
      p = InputProblem::elastic_net(s.lambda, s.eta);
      break;
    case ProblemKind::ridge:
      p = InputProblem::ridge(s.lambda);
      break;
    case ProblemKind::svm_hinge:
      p = InputProblem::svm_hinge(s.lambda);
      break;
    case ProblemKind::absdev:
      p = InputProblem::absolute_deviation(s.lambda);
      break;
    case ProblemKind::logistic_l1:
      p = InputProblem::logistic_l1(s.lambda);
      break;
    case ProblemKind::logistic_l2:
      p = InputProblem::logistic_l2(s.lambda);
      break;
  }
  if (s.smoothing_delta > 0) p = smoothing_wrap(p, s.smoothing_delta);
  return p;
}

namespace {

ProblemKind kind_from_string(const std::string& s) {
  for (ProblemKind k :
       {ProblemKind::lasso, ProblemKind::elastic_net, ProblemKind::ridge,
        ProblemKind::svm_hinge, ProblemKind::absdev, ProblemKind::logistic_l1,
        ProblemKind::logistic_l2})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("config: unknown problem kind '" + s + "'");
}

BaselineMethod method_from_string(const std::string& s) {
  for (BaselineMethod m : {BaselineMethod::prox_gd, BaselineMethod::minibatch_cd,
                           BaselineMethod::admm})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("config: unknown solver '" + s + "'");
}

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument(std::string("config: unknown key '") +
                                  it.key() + "' in " + where);
  }
}

std::string setting_label(SweepAxis axis, double value) {
  const char* name = "";
  switch (axis) {
    case SweepAxis::none: return "run";
    case SweepAxis::lambda: name = "lambda"; break;
    case SweepAxis::eta: name = "eta"; break;
    case SweepAxis::passes: name = "H"; break;
    case SweepAxis::delta: name = "delta"; break;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s=%g", name, value);
  return buf;
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::lambda: return "lambda";
    case SweepAxis::eta: return "eta";
    case SweepAxis::passes: return "H";
    case SweepAxis::delta: return "delta";
  }
  return "?";
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j = json::parse(json_text);
  check_keys(j, "the document",
             {"problem", "data", "k_blocks", "variant", "partition_seed",
              "engine", "solvers", "baseline", "sweep", "reference",
              "output_dir"});
  ExperimentConfig c;

  if (!j.contains("problem"))
    throw std::invalid_argument("config: missing 'problem'");
  {
    const json& p = j["problem"];
    check_keys(p, "problem", {"kind", "lambda", "eta", "smoothing_delta"});
    c.problem.kind = kind_from_string(p.at("kind").get<std::string>());
    c.problem.lambda = p.value("lambda", c.problem.lambda);
    c.problem.eta = p.value("eta", c.problem.eta);
    c.problem.smoothing_delta =
        p.value("smoothing_delta", c.problem.smoothing_delta);
  }

  if (!j.contains("data")) throw std::invalid_argument("config: missing 'data'");
  {
    const json& d = j["data"];
    check_keys(d, "data", {"path", "synth", "normalize"});
    if (d.contains("path") == d.contains("synth"))
      throw std::invalid_argument(
          "config: data needs exactly one of 'path' or 'synth'");
    if (d.contains("path")) c.data_path = d["path"].get<std::string>();
    if (d.contains("synth")) {
      const json& s = d["synth"];
      check_keys(s, "data.synth",
                 {"rows", "cols", "density", "noise", "seed", "classification",
                  "model_sparsity"});
      SynthSpec spec;
      spec.rows = s.value("rows", spec.rows);
      spec.cols = s.value("cols", spec.cols);
      spec.density = s.value("density", spec.density);
      spec.noise = s.value("noise", spec.noise);
      spec.seed = s.value("seed", spec.seed);
      spec.classification = s.value("classification", spec.classification);
      spec.model_sparsity = s.value("model_sparsity", spec.model_sparsity);
      c.synth = spec;
    }
    c.normalize = d.value("normalize", false);
  }

  c.k_blocks = j.value("k_blocks", std::size_t{1});
  if (c.k_blocks < 1)
    throw std::invalid_argument("config: k_blocks must be >= 1");
  c.partition_seed = j.value("partition_seed", std::uint64_t{1});

  if (j.contains("variant")) {
    std::string v = j["variant"].get<std::string>();
    if (v == "primal")
      c.variant = Variant::primal;
    else if (v == "dual")
      c.variant = Variant::dual;
    else if (v != "auto")
      throw std::invalid_argument("config: variant must be auto|primal|dual");
  }

  if (j.contains("engine")) {
    const json& e = j["engine"];
    check_keys(e, "engine",
               {"gamma", "sigma_prime", "max_rounds", "gap_tolerance",
                "passes_H", "shuffle", "check_monotone", "seed", "trace_every",
                "averaging_window", "measure_theta_every",
                "theta_oracle_passes", "sim_comm_seconds",
                "sim_step_seconds"});
    c.engine.gamma = e.value("gamma", c.engine.gamma);
    if (e.contains("sigma_prime") && !e["sigma_prime"].is_null())
      c.engine.sigma_prime = e["sigma_prime"].get<double>();
    c.engine.max_rounds = e.value("max_rounds", c.engine.max_rounds);
    if (e.contains("gap_tolerance"))
      c.engine.gap_tolerance = e["gap_tolerance"].get<double>();
    c.engine.local.passes_H = e.value("passes_H", c.engine.local.passes_H);
    c.engine.local.shuffle = e.value("shuffle", c.engine.local.shuffle);
    c.engine.local.check_monotone =
        e.value("check_monotone", c.engine.local.check_monotone);
    c.engine.local.rng_seed = e.value("seed", c.engine.local.rng_seed);
    c.engine.trace_every = e.value("trace_every", c.engine.trace_every);
    c.engine.averaging_window =
        e.value("averaging_window", c.engine.averaging_window);
    c.engine.measure_theta_every =
        e.value("measure_theta_every", c.engine.measure_theta_every);
    c.engine.theta_oracle_passes =
        e.value("theta_oracle_passes", c.engine.theta_oracle_passes);
    c.engine.sim_comm_seconds =
        e.value("sim_comm_seconds", c.engine.sim_comm_seconds);
    c.engine.sim_step_seconds =
        e.value("sim_step_seconds", c.engine.sim_step_seconds);
  }

  if (j.contains("solvers")) {
    c.solvers = j["solvers"].get<std::vector<std::string>>();
    if (c.solvers.empty())
      throw std::invalid_argument("config: solvers must not be empty");
    for (const auto& s : c.solvers)
      if (s != "cocoa") method_from_string(s);  // validates the name
  }

  if (j.contains("baseline")) {
    const json& b = j["baseline"];
    check_keys(b, "baseline",
               {"step", "batch_size", "beta", "rho", "inner_passes",
                "vary_rho"});
    c.baseline.step = b.value("step", c.baseline.step);
    c.baseline.batch_size = b.value("batch_size", c.baseline.batch_size);
    c.baseline.beta = b.value("beta", c.baseline.beta);
    c.baseline.rho = b.value("rho", c.baseline.rho);
    c.baseline.inner_passes = b.value("inner_passes", c.baseline.inner_passes);
    c.baseline.vary_rho = b.value("vary_rho", c.baseline.vary_rho);
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep", {"lambda", "eta", "H", "delta"});
    if (s.size() != 1)
      throw std::invalid_argument("config: sweep takes exactly one axis");
    auto it = s.begin();
    if (it.key() == "lambda")
      c.sweep_axis = SweepAxis::lambda;
    else if (it.key() == "eta")
      c.sweep_axis = SweepAxis::eta;
    else if (it.key() == "H")
      c.sweep_axis = SweepAxis::passes;
    else
      c.sweep_axis = SweepAxis::delta;
    c.sweep_values = it.value().get<std::vector<double>>();
    if (c.sweep_values.empty())
      throw std::invalid_argument("config: sweep values must not be empty");
    if (c.sweep_axis == SweepAxis::passes)
      for (double v : c.sweep_values)
        if (v < 1 || v != std::floor(v))
          throw std::invalid_argument("config: H values must be integers >= 1");
  }

  c.compute_reference = j.value("reference", false);
  c.output_dir = j.value("output_dir", c.output_dir);
  return c;
}

std::string experiment_config_example() {
  return R"({
  "problem": {"kind": "elastic-net", "lambda": 0.1, "eta": 0.5, "smoothing_delta": 0},
  "data": {"synth": {"rows": 100, "cols": 200, "density": 0.1, "noise": 0.1,
                     "seed": 1, "classification": false, "model_sparsity": 0.1},
           "normalize": false},
  "k_blocks": 4,
  "variant": "auto",
  "partition_seed": 1,
  "engine": {"gamma": 1.0, "sigma_prime": null, "max_rounds": 200,
             "gap_tolerance": 1e-6, "passes_H": 10, "shuffle": true,
             "check_monotone": false, "seed": 1, "trace_every": 1,
             "averaging_window": 0, "measure_theta_every": 0,
             "theta_oracle_passes": 200, "sim_comm_seconds": 0,
             "sim_step_seconds": 0},
  "solvers": ["cocoa"],
  "baseline": {"step": 0, "batch_size": 16, "beta": 1, "rho": 0,
               "inner_passes": 5, "vary_rho": false},
  "sweep": {"H": [1, 10, 100]},
  "reference": false,
  "output_dir": "out"
})";
}

Dataset load_experiment_data(const ExperimentConfig& config) {
  Dataset data;
  if (config.data_path) {
    data = load_libsvm_file(*config.data_path,
                            Orientation::features_as_columns);
  } else if (config.synth) {
    data = synth_dataset(*config.synth).data;
  } else {
    throw std::invalid_argument("config: no data source");
  }
  if (config.normalize && !data.normalized) {
    data.scale_factors = data.matrix.normalize_columns();
    data.normalized = true;
  }
  return data;
}

double reference_objective(const InputProblem& input, const Dataset& data,
                           Variant variant, std::uint64_t seed) {
  EngineConfig ref;
  ref.gamma = 1.0;
  ref.max_rounds = 50;
  ref.gap_tolerance = 1e-12;
  ref.local.passes_H = 10000;
  ref.local.rng_seed = seed;
  ref.trace_every = 0;
  InputSolveOutcome ran = solve_input(input, data, 1, ref, variant);
  return ran.run.final_gap.objective_a;
}

double model_sparsity(std::span<const double> model) {
  if (model.empty()) return 0;
  std::size_t zeros = 0;
  for (double x : model)
    if (x == 0.0) ++zeros;
  return static_cast<double>(zeros) / static_cast<double>(model.size());
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  Dataset data = load_experiment_data(config);
  data.validate();
  fs::create_directories(config.output_dir);

  std::vector<double> values = config.sweep_values;
  if (config.sweep_axis == SweepAxis::none) values = {0.0};

  ExperimentReport report;
  json manifest;
  manifest["problem"] = {{"kind", to_string(config.problem.kind)},
                         {"lambda", config.problem.lambda},
                         {"eta", config.problem.eta},
                         {"smoothing_delta", config.problem.smoothing_delta}};
  manifest["data"] = {{"source", data.source},
                      {"examples", data.n_examples()},
                      {"features", data.n_features()},
                      {"normalized", data.normalized}};
  manifest["k_blocks"] = config.k_blocks;
  manifest["sweep_axis"] = axis_name(config.sweep_axis);
  manifest["runs"] = json::array();
  json sweep_summary = json::array();

  for (double value : values) {
    ProblemSelect select = config.problem;
    EngineConfig engine = config.engine;
    switch (config.sweep_axis) {
      case SweepAxis::none: break;
      case SweepAxis::lambda: select.lambda = value; break;
      case SweepAxis::eta: select.eta = value; break;
      case SweepAxis::passes:
        engine.local.passes_H = static_cast<std::size_t>(value);
        break;
      case SweepAxis::delta: select.smoothing_delta = value; break;
    }
    std::string label = setting_label(config.sweep_axis, value);

    InputProblem input = make_input(select);
    CaseVariant cv =
        choose_variant(input, data.n_features(), data.n_examples());
    Variant variant = config.variant.value_or(cv.variant);

    std::optional<double> ref;
    if (config.compute_reference)
      ref = reference_objective(input, data, variant,
                                config.engine.local.rng_seed);

    for (const std::string& solver : config.solvers) {
      RunSummary run;
      run.solver = solver;
      run.setting = label;
      run.variant = variant;
      run.reference_objective = ref;

      std::vector<double> model;
      std::vector<RoundTrace> trace;
      double final_gap_raw = 0;

      auto t0 = std::chrono::steady_clock::now();
      if (solver == "cocoa") {
        InputSolveOutcome ran =
            solve_input(input, data, config.k_blocks, engine, variant,
                        config.partition_seed);
        model = std::move(ran.model);
        trace = std::move(ran.run.trace);
        run.final_gap = ran.run.final_gap.gap;
        final_gap_raw = ran.run.final_gap.raw;
        run.rounds = ran.run.rounds;
        run.bytes = ran.run.bytes_total;
        run.sim_seconds = ran.run.sim_seconds;
      } else {
        ProblemInstance instance = build_instance(input, data, variant);
        Partition partition = Partition::balanced(
            instance.dim_partitioned(),
            static_cast<std::uint32_t>(config.k_blocks),
            config.partition_seed);
        BaselineConfig bc = config.baseline;
        bc.method = method_from_string(solver);
        bc.max_rounds = engine.max_rounds;
        bc.gap_tolerance = engine.gap_tolerance;
        bc.trace_every = engine.trace_every;
        bc.seed = engine.local.rng_seed;
        bc.sim_comm_seconds = engine.sim_comm_seconds;
        bc.sim_step_seconds = engine.sim_step_seconds;
        BaselineResult ran = run_baseline(instance, partition, bc);
        if (variant == Variant::primal) {
          model = std::move(ran.alpha);
        } else {
          std::vector<double> v = instance.matrix.matvec(ran.alpha);
          model = map_w(instance, v);
        }
        trace = std::move(ran.trace);
        run.final_gap = ran.final_gap.gap;
        final_gap_raw = ran.final_gap.raw;
        run.rounds = ran.rounds;
        run.bytes = ran.bytes_total;
        run.sim_seconds = ran.sim_seconds;
      }
      run.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

      run.reached_tolerance = std::isfinite(engine.gap_tolerance) &&
                              run.final_gap <= engine.gap_tolerance;
      run.final_objective = input_objective(input, data, model);
      ProblemSelect base = select;
      base.smoothing_delta = 0;
      run.base_objective = input_objective(make_input(base), data, model);
      run.sparsity = model_sparsity(model);

      run.trace_file = solver + (config.sweep_axis == SweepAxis::none
                                     ? std::string{}
                                     : "-" + label) +
                       ".csv";
      write_text_file((fs::path(config.output_dir) / run.trace_file).string(),
                      trace_csv(trace, ref));

      json jr = {{"solver", run.solver},
                 {"setting", run.setting},
                 {"variant", to_string(run.variant)},
                 {"trace", run.trace_file},
                 {"final_objective", run.final_objective},
                 {"base_objective", run.base_objective},
                 {"final_gap", run.final_gap},
                 {"final_gap_raw", final_gap_raw},
                 {"rounds", run.rounds},
                 {"reached_tolerance", run.reached_tolerance},
                 {"bytes", run.bytes},
                 {"sim_seconds", run.sim_seconds},
                 {"wall_seconds", run.wall_seconds},
                 {"sparsity", run.sparsity}};
      if (ref) jr["reference_objective"] = *ref;
      manifest["runs"].push_back(jr);

      if (config.sweep_axis != SweepAxis::none)
        sweep_summary.push_back({{"axis", axis_name(config.sweep_axis)},
                                 {"value", value},
                                 {"solver", run.solver},
                                 {"rounds", run.rounds},
                                 {"reached_tolerance", run.reached_tolerance},
                                 {"sim_seconds", run.sim_seconds},
                                 {"bytes", run.bytes},
                                 {"final_gap", run.final_gap},
                                 {"sparsity", run.sparsity}});

      report.runs.push_back(std::move(run));
    }
  }

  if (config.sweep_axis != SweepAxis::none)
    manifest["sweep_summary"] = sweep_summary;

  report.manifest_json = manifest.dump(2) + "\n";
  report.manifest_path =
      (fs::path(config.output_dir) / "manifest.json").string();
  write_text_file(report.manifest_path, report.manifest_json);
  return report;
}

}  // namespace dcopt
