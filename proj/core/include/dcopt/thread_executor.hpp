#pragma once

#include <memory>
#include <vector>

#include "dcopt/engine.hpp"
#include "dcopt/executor.hpp"
#include "dcopt/worker.hpp"

namespace dcopt {

// In-process pool: one persistent thread per worker, bulk-synchronous.
std::unique_ptr<Executor> make_thread_executor(std::vector<WorkerInit> inits);

// Convenience: shard `problem` over `partition` with the engine config's
// gamma / sigma' / solver settings.
std::unique_ptr<Executor> make_thread_executor(const ProblemInstance& problem,
                                               const Partition& partition,
                                               const EngineConfig& config);

}  // namespace dcopt
