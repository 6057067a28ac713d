#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dcopt/executor.hpp"
#include "dcopt/libsvm.hpp"
#include "dcopt/wire.hpp"

namespace dcopt {

// Handshake budget; override with DCOPT_HANDSHAKE_TIMEOUT_MS.
std::size_t handshake_timeout_ms();

// -- worker side -------------------------------------------------------------

// Owns the listening socket. Binding happens in the constructor so callers
// can read back the port (pass 0 to let the OS pick) before any coordinator
// connects.
class WorkerServer {
 public:
  WorkerServer(const std::string& host, std::uint16_t port);
  ~WorkerServer();

  WorkerServer(const WorkerServer&) = delete;
  WorkerServer& operator=(const WorkerServer&) = delete;

  std::uint16_t port() const { return port_; }

  // Accepts one coordinator, performs the HELLO/ASSIGN handshake, then
  // serves rounds until DONE. `preloaded` backs by-path assignments.
  // Protocol violations raise protocol_error after an ERROR frame is sent.
  void serve_once(const Dataset* preloaded = nullptr);

 private:
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
};

// -- coordinator side ---------------------------------------------------------

struct TcpEndpoint {
  std::string host;
  std::uint16_t port;
};

// Remote pool speaking the wire protocol; one connection per worker,
// synchronous request/reply per round. Byte counters report exactly what
// crossed each socket (handshake included), so tests can difference them
// around a round.
class TcpExecutor final : public Executor {
 public:
  TcpExecutor(const std::vector<TcpEndpoint>& endpoints,
              std::vector<AssignPayload> assigns);
  ~TcpExecutor() override;

  std::size_t worker_count() const override { return workers_.size(); }
  std::size_t shared_dim() const override { return shared_dim_; }

  void broadcast(std::uint32_t round_id, RoundFlags flags,
                 std::span<const double> v) override;
  std::vector<WorkerReply> collect() override;
  std::vector<double> fetch_alpha(AlphaKind kind) override;
  void shutdown() override;

  std::uint64_t bytes_sent() const { return bytes_sent_; }
  std::uint64_t bytes_received() const { return bytes_received_; }

 private:
  struct Remote {
    int fd = -1;
    std::vector<std::uint32_t> index;
  };

  Frame read_frame(std::size_t k);

  std::vector<Remote> workers_;
  std::size_t shared_dim_ = 0;
  std::uint32_t pending_round_ = 0;
  bool outstanding_ = false;
  bool down_ = false;
  std::uint64_t bytes_sent_ = 0;
  std::uint64_t bytes_received_ = 0;
};

std::unique_ptr<TcpExecutor> make_tcp_executor(
    const std::vector<TcpEndpoint>& endpoints,
    std::vector<AssignPayload> assigns);
// Inline-data convenience: flattens each init into a mode-0 assignment.
std::unique_ptr<TcpExecutor> make_tcp_executor(
    const std::vector<TcpEndpoint>& endpoints, std::vector<WorkerInit> inits);

}  // namespace dcopt
