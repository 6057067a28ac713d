// Micro-benchmarks for the hot paths: sparse kernels, one local epoch, gap
// certification, a full eval round through the thread pool, and the wire
// codec. Numbers here guide tuning; correctness lives in the test suites.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "dcopt/engine.hpp"
#include "dcopt/local_solver.hpp"
#include "dcopt/problem.hpp"
#include "dcopt/sparse.hpp"
#include "dcopt/subproblem.hpp"
#include "dcopt/synth.hpp"
#include "dcopt/thread_executor.hpp"
#include "dcopt/wire.hpp"
#include "dcopt/worker.hpp"

namespace {

using namespace dcopt;

struct Bench {
  ProblemInstance problem;
  Partition partition;
  std::vector<double> alpha;
  std::vector<double> v, w;
  ColumnMatrix block_cols;
  SeparableTerm block_sep;
  std::vector<double> alpha_block;

  Bench() : block_sep(SeparableTerm::l2(1.0, 1)) {
    SynthData sy = synth_dataset({500, 2000, 0.05, 0.1, 9, false, 0.05});
    problem = build_instance(InputProblem::elastic_net(0.1, 0.5), sy.data,
                             Variant::primal);
    partition = Partition::balanced(problem.dim_partitioned(), 4, 1);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 0.3);
    alpha.resize(problem.dim_partitioned());
    for (auto& a : alpha) a = gauss(rng);
    v = problem.matrix.matvec(alpha);
    w = problem.smooth.gradient(v);

    const auto& idx = partition.blocks[0];
    block_cols = problem.matrix.select_columns(idx);
    block_sep = problem.separable.slice(idx);
    for (auto j : idx) alpha_block.push_back(alpha[j]);
  }

  SubproblemView view() const {
    SubproblemView view;
    view.v = v;
    view.w = w;
    view.columns = &block_cols;
    view.alpha_block = alpha_block;
    view.separable = &block_sep;
    view.smooth = &problem.smooth;
    view.sigma_prime = 4.0;
    view.tau = problem.smooth.tau();
    view.gamma = 1.0;
    view.k_blocks = 4;
    return view;
  }
};

Bench& fixture() {
  static Bench b;
  return b;
}

void BM_sparse_matvec(benchmark::State& state) {
  Bench& b = fixture();
  for (auto _ : state) {
    auto out = b.problem.matrix.matvec(b.alpha);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(b.problem.matrix.nonzeros()));
}
BENCHMARK(BM_sparse_matvec);

void BM_local_epoch(benchmark::State& state) {
  Bench& b = fixture();
  SubproblemView view = b.view();
  LocalSolverConfig cfg;
  cfg.passes_H = 1;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.rng_seed = seed++;
    LocalResult res = run_local_solver(view, cfg);
    benchmark::DoNotOptimize(res.delta_block.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(b.block_cols.cols()));
}
BENCHMARK(BM_local_epoch);

void BM_duality_gap(benchmark::State& state) {
  Bench& b = fixture();
  for (auto _ : state) {
    GapValue g = duality_gap(b.problem, b.alpha, b.v);
    benchmark::DoNotOptimize(g.gap);
  }
}
BENCHMARK(BM_duality_gap);

// One eval-only exchange through the persistent thread pool: broadcast,
// worker-side objective scan, reply collection. No state changes, so the
// round can repeat forever.
void BM_thread_pool_round(benchmark::State& state) {
  Bench& b = fixture();
  EngineConfig cfg;
  static auto executor = make_thread_executor(b.problem, b.partition, cfg);
  static std::uint32_t round = 0;
  RoundFlags flags;
  flags.eval_only = true;
  std::vector<double> v0(b.problem.dim_shared(), 0.0);
  for (auto _ : state) {
    executor->broadcast(++round, flags, v0);
    auto replies = executor->collect();
    benchmark::DoNotOptimize(replies.data());
  }
}
BENCHMARK(BM_thread_pool_round);

void BM_wire_broadcast_roundtrip(benchmark::State& state) {
  BroadcastPayload payload;
  payload.round_id = 3;
  payload.v.assign(1000, 1.25);
  for (auto _ : state) {
    Frame f = encode_broadcast(payload);
    auto bytes = encode_frame(f);
    Frame back = decode_frame(bytes);
    BroadcastPayload out = decode_broadcast(back);
    benchmark::DoNotOptimize(out.v.data());
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(broadcast_frame_bytes(1000)));
}
BENCHMARK(BM_wire_broadcast_roundtrip);

void BM_wire_result_roundtrip(benchmark::State& state) {
  ResultDvPayload payload;
  payload.round_id = 3;
  payload.steps = 500;
  payload.g_sum = 1.5;
  payload.conj_sum = -0.5;
  payload.delta_v.assign(1000, -0.75);
  for (auto _ : state) {
    Frame f = encode_result_dv(payload);
    auto bytes = encode_frame(f);
    Frame back = decode_frame(bytes);
    ResultDvPayload out = decode_result_dv(back);
    benchmark::DoNotOptimize(out.delta_v.data());
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(result_frame_bytes(1000)));
}
BENCHMARK(BM_wire_result_roundtrip);

}  // namespace

BENCHMARK_MAIN();
