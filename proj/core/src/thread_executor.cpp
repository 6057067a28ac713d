#include "dcopt/thread_executor.hpp"

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dcopt/error.hpp"

namespace dcopt {

namespace {

class ThreadExecutor final : public Executor {
 public:
  explicit ThreadExecutor(std::vector<WorkerInit> inits) {
    if (inits.empty())
      throw std::invalid_argument("thread executor: no workers");
    shared_dim_ = inits.front().smooth.dim();
    slots_.reserve(inits.size());
    for (auto& init : inits) {
      auto slot = std::make_unique<Slot>();
      slot->core = std::make_unique<WorkerCore>(std::move(init));
      slots_.push_back(std::move(slot));
    }
    threads_.reserve(slots_.size());
    for (std::size_t k = 0; k < slots_.size(); ++k)
      threads_.emplace_back([this, k] { worker_loop(k); });
  }

  ~ThreadExecutor() override { shutdown(); }

  std::size_t worker_count() const override { return slots_.size(); }
  std::size_t shared_dim() const override { return shared_dim_; }

  void broadcast(std::uint32_t round_id, RoundFlags flags,
                 std::span<const double> v) override {
    std::unique_lock lock(mu_);
    if (stopped_) throw contract_error("thread executor: already shut down");
    if (outstanding_)
      throw contract_error("thread executor: broadcast without collect");
    round_id_ = round_id;
    flags_ = flags;
    v_.assign(v.begin(), v.end());
    done_count_ = 0;
    ++generation_;
    outstanding_ = true;
    lock.unlock();
    cv_work_.notify_all();
  }

  std::vector<WorkerReply> collect() override {
    std::unique_lock lock(mu_);
    if (!outstanding_)
      throw contract_error("thread executor: collect without broadcast");
    cv_done_.wait(lock, [this] { return done_count_ == slots_.size(); });
    outstanding_ = false;
    std::vector<WorkerReply> replies;
    replies.reserve(slots_.size());
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      auto& slot = *slots_[k];
      if (slot.failure) {
        auto failure = slot.failure;
        lock.unlock();
        shutdown();
        try {
          std::rethrow_exception(failure);
        } catch (const std::exception& e) {
          throw executor_error("worker " + std::to_string(k) +
                               " failed: " + e.what());
        }
      }
      replies.push_back(slot.reply);
    }
    return replies;
  }

  std::vector<double> fetch_alpha(AlphaKind kind) override {
    std::unique_lock lock(mu_);
    if (outstanding_)
      throw contract_error("thread executor: fetch_alpha mid-round");
    std::size_t total = 0;
    for (const auto& slot : slots_) total += slot->core->init().index.size();
    std::vector<double> alpha(total, 0.0);
    for (const auto& slot : slots_) {
      const auto& index = slot->core->init().index;
      if (kind == AlphaKind::last) {
        auto block = slot->core->alpha();
        for (std::size_t j = 0; j < index.size(); ++j)
          alpha[index[j]] = block[j];
      } else {
        auto block = slot->core->averaged_alpha();
        for (std::size_t j = 0; j < index.size(); ++j)
          alpha[index[j]] = block[j];
      }
    }
    return alpha;
  }

  void shutdown() override {
    {
      std::lock_guard lock(mu_);
      if (stopped_) return;
      stopped_ = true;
    }
    cv_work_.notify_all();
    for (auto& t : threads_)
      if (t.joinable()) t.join();
  }

 private:
  struct Slot {
    std::unique_ptr<WorkerCore> core;
    WorkerReply reply;
    std::exception_ptr failure;
  };

  void worker_loop(std::size_t k) {
    std::uint64_t seen = 0;
    for (;;) {
      std::unique_lock lock(mu_);
      cv_work_.wait(lock, [&] { return stopped_ || generation_ != seen; });
      if (stopped_) return;
      seen = generation_;
      std::uint32_t round = round_id_;
      RoundFlags flags = flags_;
      std::span<const double> v(v_);  // stable until everyone is done
      lock.unlock();

      auto& slot = *slots_[k];
      slot.failure = nullptr;
      try {
        slot.reply = slot.core->process(round, flags, v);
      } catch (...) {
        slot.failure = std::current_exception();
      }

      lock.lock();
      ++done_count_;
      if (done_count_ == slots_.size()) {
        lock.unlock();
        cv_done_.notify_all();
      }
    }
  }

  std::vector<std::unique_ptr<Slot>> slots_;
  std::vector<std::thread> threads_;
  std::size_t shared_dim_ = 0;

  std::mutex mu_;
  std::condition_variable cv_work_, cv_done_;
  std::uint64_t generation_ = 0;
  std::size_t done_count_ = 0;
  std::uint32_t round_id_ = 0;
  RoundFlags flags_;
  std::vector<double> v_;
  bool outstanding_ = false;
  bool stopped_ = false;
};

}  // namespace

std::unique_ptr<Executor> make_thread_executor(std::vector<WorkerInit> inits) {
  return std::make_unique<ThreadExecutor>(std::move(inits));
}

std::unique_ptr<Executor> make_thread_executor(const ProblemInstance& problem,
                                               const Partition& partition,
                                               const EngineConfig& config) {
  auto inits = make_worker_inits(
      problem, partition, config.gamma,
      config.effective_sigma(partition.k_blocks), config.local,
      averaging_start_round(config), config.theta_oracle_passes);
  return make_thread_executor(std::move(inits));
}

}  // namespace dcopt
