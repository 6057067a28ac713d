#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcopt/worker.hpp"

namespace dcopt {

enum class AlphaKind : std::uint8_t { last, averaged };

// Bulk-synchronous worker pool: exactly one collect per broadcast. Both the
// in-process pool and the TCP runtime implement this, and the engine cannot
// tell them apart.
class Executor {
 public:
  virtual ~Executor() = default;

  virtual std::size_t worker_count() const = 0;
  virtual std::size_t shared_dim() const = 0;

  virtual void broadcast(std::uint32_t round_id, RoundFlags flags,
                         std::span<const double> v) = 0;
  // All K replies sorted by worker id, or executor_error naming the worker
  // that failed.
  virtual std::vector<WorkerReply> collect() = 0;

  // Assembles the full coefficient vector from the workers' blocks. Valid
  // between rounds only.
  virtual std::vector<double> fetch_alpha(AlphaKind kind) = 0;

  virtual void shutdown() = 0;
};

}  // namespace dcopt
