#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <thread>

#include "dcopt/engine.hpp"
#include "dcopt/error.hpp"
#include "dcopt/tcp.hpp"
#include "dcopt/thread_executor.hpp"
#include "dcopt/wire.hpp"
#include "oracles.hpp"

using namespace dcopt;

TEST_SUITE_BEGIN("tcp");

namespace {

void send_frame_fd(int fd, const Frame& f) {
  auto bytes = encode_frame(f);
  std::size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n <= 0) return;  // peer gone; scripts just stop
    off += static_cast<std::size_t>(n);
  }
}

bool recv_exact(int fd, std::uint8_t* out, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    ssize_t n = recv(fd, out + off, len - off, 0);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

Frame recv_frame_fd(int fd) {
  std::vector<std::uint8_t> whole(frame_header_bytes);
  if (!recv_exact(fd, whole.data(), frame_header_bytes))
    throw protocol_error("script: peer closed");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(whole[i]) << (8 * i);
  whole.resize(frame_header_bytes + len);
  if (len && !recv_exact(fd, whole.data() + frame_header_bytes, len))
    throw protocol_error("script: peer closed");
  return decode_frame(whole);
}

void drain(int fd) {
  char buf[256];
  while (recv(fd, buf, sizeof buf, 0) > 0) {
  }
}

// A scripted stand-in for a worker: accepts one connection and plays the
// script, so executor-side failure handling can be driven precisely.
class FakeWorker {
 public:
  explicit FakeWorker(std::function<void(int)> script) {
    listen_fd_ = socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(listen_fd_ >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr),
                 sizeof addr) == 0);
    REQUIRE(listen(listen_fd_, 1) == 0);
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    th_ = std::thread([this, script] {
      int fd = accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) return;
      try {
        script(fd);
        drain(fd);
      } catch (...) {
      }
      ::close(fd);
    });
  }
  ~FakeWorker() {
    th_.join();
    ::close(listen_fd_);
  }
  std::uint16_t port() const { return port_; }

 private:
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::thread th_;
};

void handshake_ok(int fd) {
  recv_frame_fd(fd);  // coordinator hello
  send_frame_fd(fd, encode_hello());
  recv_frame_fd(fd);  // assign
  send_frame_fd(fd, encode_assign_ack());
}

struct TestProblem {
  Dataset data;
  ProblemInstance instance;
  Partition partition;
};

TestProblem lasso_problem(std::size_t rows, std::size_t cols,
                          std::uint32_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TestProblem t;
  t.data.matrix = oracle::random_matrix(rows, cols, rng, 0.5);
  t.data.labels = oracle::random_vector(rows, rng);
  t.data.orientation = Orientation::features_as_columns;
  t.instance =
      build_instance(InputProblem::lasso(0.15), t.data, Variant::primal);
  t.partition = Partition::balanced(cols, k, seed + 1);
  return t;
}

std::vector<TcpEndpoint> loopback(std::initializer_list<std::uint16_t> ports) {
  std::vector<TcpEndpoint> out;
  for (auto p : ports) out.push_back({"127.0.0.1", p});
  return out;
}

}  // namespace

TEST_CASE("thread and tcp executors follow identical trajectories") {
  TestProblem t = lasso_problem(10, 18, 2, 31);
  EngineConfig cfg;
  cfg.max_rounds = 7;
  cfg.local.passes_H = 4;
  cfg.local.rng_seed = 42;
  cfg.averaging_window = 3;
  cfg.measure_theta_every = 3;
  cfg.theta_oracle_passes = 60;
  cfg.sim_comm_seconds = 0.05;
  cfg.sim_step_seconds = 0.001;

  auto inits = make_worker_inits(t.instance, t.partition, cfg.gamma,
                                 cfg.effective_sigma(2), cfg.local,
                                 averaging_start_round(cfg),
                                 cfg.theta_oracle_passes);

  auto threaded = make_thread_executor(inits);
  SolveResult a = run_cocoa(t.instance, t.partition, *threaded, cfg);
  threaded->shutdown();

  WorkerServer s0("127.0.0.1", 0);
  WorkerServer s1("127.0.0.1", 0);
  CHECK(s0.port() != 0);
  CHECK(s0.port() != s1.port());
  std::atomic<bool> ok0{false}, ok1{false};
  std::thread w0([&] {
    s0.serve_once();
    ok0 = true;
  });
  std::thread w1([&] {
    s1.serve_once();
    ok1 = true;
  });
  auto remote = make_tcp_executor(loopback({s0.port(), s1.port()}), inits);
  SolveResult b = run_cocoa(t.instance, t.partition, *remote, cfg);
  remote->shutdown();
  w0.join();
  w1.join();
  CHECK(ok0);
  CHECK(ok1);

  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].round == b.trace[i].round);
    CHECK(a.trace[i].seconds == b.trace[i].seconds);
    CHECK(a.trace[i].objective_a == b.trace[i].objective_a);
    CHECK(a.trace[i].objective_b == b.trace[i].objective_b);
    CHECK(a.trace[i].gap == b.trace[i].gap);
    CHECK(a.trace[i].bytes == b.trace[i].bytes);
    if (std::isnan(a.trace[i].theta))
      CHECK(std::isnan(b.trace[i].theta));
    else
      CHECK(a.trace[i].theta == b.trace[i].theta);
  }
  CHECK(a.alpha == b.alpha);
  CHECK(a.averaged_alpha == b.averaged_alpha);
  CHECK(a.v == b.v);
  CHECK(a.rounds == b.rounds);
  CHECK(a.bytes_total == b.bytes_total);
  CHECK(a.final_gap.gap == b.final_gap.gap);
}

TEST_CASE("tcp byte counters match the advertised frame sizes") {
  TestProblem t = lasso_problem(6, 7, 2, 57);
  LocalSolverConfig solver;
  solver.passes_H = 2;
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 2.0, solver);

  WorkerServer s0("127.0.0.1", 0);
  WorkerServer s1("127.0.0.1", 0);
  std::thread w0([&] { s0.serve_once(); });
  std::thread w1([&] { s1.serve_once(); });
  auto exec = make_tcp_executor(loopback({s0.port(), s1.port()}), inits);

  // handshake: each worker echoed a 6-byte hello and a 5-byte assign ack
  CHECK(exec->bytes_received() == 2 * (6 + 5));

  const std::size_t d = 6;
  std::vector<double> v(d, 0.0);
  std::uint64_t sent = exec->bytes_sent();
  std::uint64_t received = exec->bytes_received();

  exec->broadcast(1, {}, v);
  CHECK(exec->bytes_sent() - sent == 2 * broadcast_frame_bytes(d));
  auto replies = exec->collect();
  CHECK(exec->bytes_received() - received == 2 * result_frame_bytes(d));
  REQUIRE(replies.size() == 2);
  CHECK(replies[0].steps ==
        2 * static_cast<std::uint32_t>(t.partition.block_size(0)));

  // the per-round totals the engine charges are exactly these two formulas
  CHECK(round_bytes(2, d) ==
        2 * (broadcast_frame_bytes(d) + result_frame_bytes(d)));
  CHECK(eval_round_bytes(2, d) ==
        2 * (broadcast_frame_bytes(d) + result_frame_bytes(0)));

  sent = exec->bytes_sent();
  received = exec->bytes_received();
  RoundFlags eval;
  eval.eval_only = true;
  exec->broadcast(2, eval, v);
  exec->collect();
  CHECK(exec->bytes_sent() - sent == 2 * broadcast_frame_bytes(d));
  CHECK(exec->bytes_received() - received == 2 * result_frame_bytes(0));

  sent = exec->bytes_sent();
  received = exec->bytes_received();
  auto alpha = exec->fetch_alpha(AlphaKind::last);
  CHECK(alpha.size() == 7);
  CHECK(exec->bytes_sent() - sent == 2 * 6);  // header + mode byte each
  // each block comes back as header + count + 8 bytes per coefficient
  CHECK(exec->bytes_received() - received == 2 * 9 + 8 * 7);

  sent = exec->bytes_sent();
  exec->shutdown();
  CHECK(exec->bytes_sent() - sent == 2 * 5);  // one DONE frame each
  w0.join();
  w1.join();
}

TEST_CASE("a worker server handles sessions back to back") {
  TestProblem t = lasso_problem(5, 4, 1, 73);
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 1.0, {});

  WorkerServer server("127.0.0.1", 0);
  std::thread w([&] {
    server.serve_once();
    server.serve_once();
  });

  std::vector<double> first;
  for (int session = 0; session < 2; ++session) {
    auto exec = make_tcp_executor(loopback({server.port()}), inits);
    std::vector<double> v(5, 0.0);
    exec->broadcast(1, {}, v);
    auto replies = exec->collect();
    REQUIRE(replies.size() == 1);
    if (session == 0)
      first = replies[0].delta_v;
    else
      CHECK(replies[0].delta_v == first);  // same seed, same session state
    exec->shutdown();
  }
  w.join();
}

TEST_CASE("a by-path assignment runs against a preloaded worker") {
  TestProblem t = lasso_problem(6, 5, 1, 91);
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 1.0, {});
  AssignPayload by_path = make_assign_by_path(
      inits[0], "train.svm", Orientation::features_as_columns);

  WorkerServer server("127.0.0.1", 0);
  std::thread w([&] { server.serve_once(&t.data); });
  std::vector<AssignPayload> assigns{by_path};
  TcpExecutor exec(loopback({server.port()}), assigns);
  std::vector<double> v(6, 0.0);
  exec.broadcast(1, {}, v);
  auto remote = exec.collect();
  exec.shutdown();
  w.join();

  // same trajectory as the inline-data worker
  auto local = make_thread_executor(inits);
  local->broadcast(1, {}, v);
  auto expected = local->collect();
  local->shutdown();
  CHECK(remote[0].delta_v == expected[0].delta_v);
  CHECK(remote[0].g_sum == expected[0].g_sum);
  CHECK(remote[0].conj_sum == expected[0].conj_sum);
}

TEST_CASE("a by-path assignment fails loudly without preloaded data") {
  TestProblem t = lasso_problem(6, 5, 1, 92);
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 1.0, {});
  AssignPayload by_path = make_assign_by_path(
      inits[0], "train.svm", Orientation::features_as_columns);

  WorkerServer server("127.0.0.1", 0);
  std::atomic<bool> threw{false};
  std::thread w([&] {
    try {
      server.serve_once(nullptr);
    } catch (const protocol_error&) {
      threw = true;
    }
  });
  std::vector<AssignPayload> assigns{by_path};
  CHECK_THROWS_WITH_AS(TcpExecutor(loopback({server.port()}), assigns),
                       doctest::Contains("worker 0 failed"), executor_error);
  w.join();
  CHECK(threw);
}

TEST_CASE("the worker refuses a protocol version it does not speak") {
  WorkerServer server("127.0.0.1", 0);
  std::atomic<bool> threw{false};
  std::thread w([&] {
    try {
      server.serve_once();
    } catch (const protocol_error&) {
      threw = true;
    }
  });

  int fd = socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(server.port());
  REQUIRE(connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  send_frame_fd(fd, encode_hello(3));
  Frame f = recv_frame_fd(fd);
  CHECK(f.tag == Tag::error);
  CHECK(decode_error(f) == "unsupported protocol version");
  drain(fd);
  ::close(fd);
  w.join();
  CHECK(threw);
}

TEST_CASE("the coordinator rejects a worker speaking another version") {
  TestProblem t = lasso_problem(4, 3, 1, 95);
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 1.0, {});
  FakeWorker fake([](int fd) {
    recv_frame_fd(fd);
    send_frame_fd(fd, encode_hello(2));
  });
  std::vector<AssignPayload> assigns{make_assign(inits[0])};
  CHECK_THROWS_WITH_AS(TcpExecutor(loopback({fake.port()}), assigns),
                       doctest::Contains("protocol version mismatch"),
                       executor_error);
}

TEST_CASE("an error frame mid-round names the failing worker") {
  TestProblem t = lasso_problem(4, 6, 2, 96);
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 2.0, {});

  FakeWorker good([](int fd) {
    handshake_ok(fd);
    BroadcastPayload b = decode_broadcast(recv_frame_fd(fd));
    ResultDvPayload r;
    r.round_id = b.round_id;
    r.delta_v.assign(b.v.size(), 0.0);
    send_frame_fd(fd, encode_result_dv(r));
  });
  FakeWorker bad([](int fd) {
    handshake_ok(fd);
    recv_frame_fd(fd);
    send_frame_fd(fd, encode_error("boom"));
  });

  std::vector<AssignPayload> assigns{make_assign(inits[0]),
                                     make_assign(inits[1])};
  TcpExecutor exec(loopback({good.port(), bad.port()}), assigns);
  std::vector<double> v(4, 0.0);
  exec.broadcast(1, {}, v);
  CHECK_THROWS_WITH_AS(exec.collect(),
                       doctest::Contains("worker 1 failed: boom"),
                       executor_error);
  // the failure tore the pool down
  CHECK_THROWS_AS(exec.broadcast(2, {}, v), contract_error);
}

TEST_CASE("answering the wrong round is a protocol error") {
  TestProblem t = lasso_problem(4, 3, 1, 97);
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 1.0, {});
  FakeWorker fake([](int fd) {
    handshake_ok(fd);
    BroadcastPayload b = decode_broadcast(recv_frame_fd(fd));
    ResultDvPayload r;
    r.round_id = b.round_id + 1;  // echo the wrong round
    r.delta_v.assign(b.v.size(), 0.0);
    send_frame_fd(fd, encode_result_dv(r));
  });
  std::vector<AssignPayload> assigns{make_assign(inits[0])};
  TcpExecutor exec(loopback({fake.port()}), assigns);
  std::vector<double> v(4, 0.0);
  exec.broadcast(1, {}, v);
  CHECK_THROWS_WITH_AS(exec.collect(),
                       doctest::Contains("answered the wrong round"),
                       protocol_error);
}

TEST_CASE("an unreachable worker fails within the handshake budget") {
  TestProblem t = lasso_problem(4, 3, 1, 98);
  auto inits = make_worker_inits(t.instance, t.partition, 1.0, 1.0, {});

  // grab a port the OS just released; nothing listens on it
  int probe = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(bind(probe, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  socklen_t len = sizeof addr;
  getsockname(probe, reinterpret_cast<sockaddr*>(&addr), &len);
  std::uint16_t dead = ntohs(addr.sin_port);
  ::close(probe);

  setenv("DCOPT_HANDSHAKE_TIMEOUT_MS", "300", 1);
  std::vector<AssignPayload> assigns{make_assign(inits[0])};
  CHECK_THROWS_WITH_AS(TcpExecutor(loopback({dead}), assigns),
                       doctest::Contains("unreachable"), executor_error);
  unsetenv("DCOPT_HANDSHAKE_TIMEOUT_MS");
}

TEST_SUITE_END();
