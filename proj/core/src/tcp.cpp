#include "dcopt/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "dcopt/error.hpp"
#include "dcopt/worker.hpp"

namespace dcopt {

namespace {

std::string errno_text(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

void set_io_timeout(int fd, std::size_t ms) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(ms / 1000);
  tv.tv_usec = static_cast<suseconds_t>((ms % 1000) * 1000);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void clear_io_timeout(int fd) { set_io_timeout(fd, 0); }

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw protocol_error("cannot resolve host " + host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

void send_all(int fd, const std::uint8_t* data, std::size_t len,
              std::uint64_t* counter) {
  std::size_t off = 0;
  while (off < len) {
    ssize_t n = send(fd, data + off, len - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK)
        throw protocol_error("socket send timed out");
      throw protocol_error(errno_text("socket send failed"));
    }
    off += static_cast<std::size_t>(n);
  }
  if (counter) *counter += len;
}

void recv_all(int fd, std::uint8_t* data, std::size_t len,
              std::uint64_t* counter) {
  std::size_t off = 0;
  while (off < len) {
    ssize_t n = recv(fd, data + off, len - off, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK)
        throw protocol_error("socket receive timed out");
      throw protocol_error(errno_text("socket receive failed"));
    }
    if (n == 0) throw protocol_error("connection closed by peer");
    off += static_cast<std::size_t>(n);
  }
  if (counter) *counter += len;
}

void send_frame(int fd, const Frame& f, std::uint64_t* counter) {
  auto bytes = encode_frame(f);
  send_all(fd, bytes.data(), bytes.size(), counter);
}

Frame recv_frame(int fd, std::uint64_t* counter) {
  std::uint8_t header[frame_header_bytes];
  recv_all(fd, header, sizeof header, counter);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(header[i]) << (8 * i);
  if (len > max_frame_payload) throw protocol_error("frame length too large");
  std::vector<std::uint8_t> whole(frame_header_bytes + len);
  std::memcpy(whole.data(), header, sizeof header);
  if (len) recv_all(fd, whole.data() + frame_header_bytes, len, counter);
  return decode_frame(whole);
}

void close_quiet(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

}  // namespace

std::size_t handshake_timeout_ms() {
  if (const char* env = std::getenv("DCOPT_HANDSHAKE_TIMEOUT_MS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 10'000;
}

// -- WorkerServer -------------------------------------------------------------

WorkerServer::WorkerServer(const std::string& host, std::uint16_t port) {
  listen_fd_ = socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw protocol_error(errno_text("socket failed"));
  int yes = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr = resolve(host, port);
  if (bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    std::string msg = errno_text("bind failed on " + host);
    close_quiet(listen_fd_);
    throw protocol_error(msg);
  }
  if (listen(listen_fd_, 8) < 0) {
    std::string msg = errno_text("listen failed");
    close_quiet(listen_fd_);
    throw protocol_error(msg);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

WorkerServer::~WorkerServer() { close_quiet(listen_fd_); }

void WorkerServer::serve_once(const Dataset* preloaded) {
  int fd = accept(listen_fd_, nullptr, nullptr);
  if (fd < 0) throw protocol_error(errno_text("accept failed"));
  set_io_timeout(fd, handshake_timeout_ms());

  std::unique_ptr<WorkerCore> core;
  try {
    std::uint8_t version = decode_hello(recv_frame(fd, nullptr));
    if (version != wire_version) {
      send_frame(fd, encode_error("unsupported protocol version"), nullptr);
      throw protocol_error("handshake: unsupported protocol version " +
                           std::to_string(version));
    }
    send_frame(fd, encode_hello(), nullptr);

    AssignPayload assign = decode_assign(recv_frame(fd, nullptr));
    core = std::make_unique<WorkerCore>(complete_assign(assign, preloaded));
    send_frame(fd, encode_assign_ack(), nullptr);
    clear_io_timeout(fd);

    for (;;) {
      Frame f = recv_frame(fd, nullptr);
      switch (f.tag) {
        case Tag::broadcast_v: {
          BroadcastPayload b = decode_broadcast(f);
          WorkerReply reply = core->process(b.round_id, b.flags, b.v);
          ResultDvPayload r;
          r.round_id = b.round_id;
          r.steps = reply.steps;
          r.g_sum = reply.g_sum;
          r.conj_sum = reply.conj_sum;
          r.theta = reply.theta;
          r.delta_v = std::move(reply.delta_v);
          send_frame(fd, encode_result_dv(r), nullptr);
          break;
        }
        case Tag::fetch_alpha: {
          AlphaKind kind = decode_fetch_alpha(f);
          if (kind == AlphaKind::last) {
            auto a = core->alpha();
            send_frame(fd, encode_result_alpha(a), nullptr);
          } else {
            send_frame(fd, encode_result_alpha(core->averaged_alpha()),
                       nullptr);
          }
          break;
        }
        case Tag::done:
          close_quiet(fd);
          return;
        default:
          throw protocol_error("worker: unexpected frame tag");
      }
    }
  } catch (const std::exception& e) {
    if (fd >= 0) {
      try {
        send_frame(fd, encode_error(e.what()), nullptr);
      } catch (...) {
      }
      close_quiet(fd);
    }
    throw;
  }
}

// -- TcpExecutor --------------------------------------------------------------

TcpExecutor::TcpExecutor(const std::vector<TcpEndpoint>& endpoints,
                         std::vector<AssignPayload> assigns) {
  if (endpoints.empty() || endpoints.size() != assigns.size())
    throw std::invalid_argument("tcp executor: endpoint/assign count mismatch");
  shared_dim_ = assigns.front().smooth_dim;
  const std::size_t timeout = handshake_timeout_ms();
  workers_.resize(endpoints.size());
  try {
    for (std::size_t k = 0; k < endpoints.size(); ++k) {
      sockaddr_in addr = resolve(endpoints[k].host, endpoints[k].port);
      auto deadline = std::chrono::steady_clock::now() +
                      std::chrono::milliseconds(timeout);
      int fd = -1;
      for (;;) {
        fd = socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw protocol_error(errno_text("socket failed"));
        if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0)
          break;
        int err = errno;
        ::close(fd);
        fd = -1;
        if (err != ECONNREFUSED ||
            std::chrono::steady_clock::now() >= deadline)
          throw executor_error("worker " + std::to_string(k) +
                               " unreachable at " + endpoints[k].host + ":" +
                               std::to_string(endpoints[k].port) + ": " +
                               std::strerror(err));
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      workers_[k].fd = fd;
      set_io_timeout(fd, timeout);
      int yes = 1;
      setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);

      send_frame(fd, encode_hello(), &bytes_sent_);
      Frame hello = recv_frame(fd, &bytes_received_);
      if (hello.tag == Tag::error)
        throw executor_error("worker " + std::to_string(k) +
                             " failed: " + decode_error(hello));
      if (decode_hello(hello) != wire_version)
        throw executor_error("worker " + std::to_string(k) +
                             ": protocol version mismatch");

      send_frame(fd, encode_assign(assigns[k]), &bytes_sent_);
      Frame ack = recv_frame(fd, &bytes_received_);
      if (ack.tag == Tag::error)
        throw executor_error("worker " + std::to_string(k) +
                             " failed: " + decode_error(ack));
      if (ack.tag != Tag::assign || !ack.payload.empty())
        throw protocol_error("worker " + std::to_string(k) +
                             ": bad assign ack");
      clear_io_timeout(fd);
      workers_[k].index = assigns[k].index;
    }
  } catch (...) {
    for (auto& w : workers_) close_quiet(w.fd);
    down_ = true;
    throw;
  }
}

TcpExecutor::~TcpExecutor() { shutdown(); }

Frame TcpExecutor::read_frame(std::size_t k) {
  Frame f = recv_frame(workers_[k].fd, &bytes_received_);
  if (f.tag == Tag::error) {
    std::string msg = decode_error(f);
    shutdown();
    throw executor_error("worker " + std::to_string(k) + " failed: " + msg);
  }
  return f;
}

void TcpExecutor::broadcast(std::uint32_t round_id, RoundFlags flags,
                            std::span<const double> v) {
  if (down_) throw contract_error("tcp executor: already shut down");
  if (outstanding_)
    throw contract_error("tcp executor: broadcast without collect");
  BroadcastPayload p;
  p.round_id = round_id;
  p.flags = flags;
  p.v.assign(v.begin(), v.end());
  Frame f = encode_broadcast(p);
  for (std::size_t k = 0; k < workers_.size(); ++k) {
    try {
      send_frame(workers_[k].fd, f, &bytes_sent_);
    } catch (const std::exception& e) {
      shutdown();
      throw executor_error("worker " + std::to_string(k) +
                           " failed: " + e.what());
    }
  }
  pending_round_ = round_id;
  outstanding_ = true;
}

std::vector<WorkerReply> TcpExecutor::collect() {
  if (down_) throw contract_error("tcp executor: already shut down");
  if (!outstanding_)
    throw contract_error("tcp executor: collect without broadcast");
  outstanding_ = false;
  std::vector<WorkerReply> replies;
  replies.reserve(workers_.size());
  for (std::size_t k = 0; k < workers_.size(); ++k) {
    Frame f;
    try {
      f = read_frame(k);
    } catch (const executor_error&) {
      throw;
    } catch (const std::exception& e) {
      shutdown();
      throw executor_error("worker " + std::to_string(k) +
                           " failed: " + e.what());
    }
    ResultDvPayload p = decode_result_dv(f);
    if (p.round_id != pending_round_) {
      shutdown();
      throw protocol_error("worker " + std::to_string(k) +
                           " answered the wrong round");
    }
    WorkerReply r;
    r.worker_id = static_cast<std::uint32_t>(k);
    r.steps = p.steps;
    r.g_sum = p.g_sum;
    r.conj_sum = p.conj_sum;
    r.theta = p.theta;
    r.delta_v = std::move(p.delta_v);
    replies.push_back(std::move(r));
  }
  return replies;
}

std::vector<double> TcpExecutor::fetch_alpha(AlphaKind kind) {
  if (down_) throw contract_error("tcp executor: already shut down");
  if (outstanding_)
    throw contract_error("tcp executor: fetch_alpha mid-round");
  std::size_t total = 0;
  for (const auto& w : workers_) total += w.index.size();
  std::vector<double> alpha(total, 0.0);
  Frame req = encode_fetch_alpha(kind);
  for (std::size_t k = 0; k < workers_.size(); ++k) {
    try {
      send_frame(workers_[k].fd, req, &bytes_sent_);
      Frame f = read_frame(k);
      std::vector<double> block = decode_result_alpha(f);
      if (block.size() != workers_[k].index.size())
        throw protocol_error("alpha block has the wrong size");
      for (std::size_t j = 0; j < block.size(); ++j)
        alpha[workers_[k].index[j]] = block[j];
    } catch (const executor_error&) {
      throw;
    } catch (const std::exception& e) {
      shutdown();
      throw executor_error("worker " + std::to_string(k) +
                           " failed: " + e.what());
    }
  }
  return alpha;
}

void TcpExecutor::shutdown() {
  if (down_) return;
  down_ = true;
  Frame done = encode_done();
  for (auto& w : workers_) {
    if (w.fd < 0) continue;
    try {
      send_frame(w.fd, done, &bytes_sent_);
    } catch (...) {
    }
    close_quiet(w.fd);
  }
}

std::unique_ptr<TcpExecutor> make_tcp_executor(
    const std::vector<TcpEndpoint>& endpoints,
    std::vector<AssignPayload> assigns) {
  return std::make_unique<TcpExecutor>(endpoints, std::move(assigns));
}

std::unique_ptr<TcpExecutor> make_tcp_executor(
    const std::vector<TcpEndpoint>& endpoints, std::vector<WorkerInit> inits) {
  std::vector<AssignPayload> assigns;
  assigns.reserve(inits.size());
  for (const auto& init : inits) assigns.push_back(make_assign(init));
  return std::make_unique<TcpExecutor>(endpoints, std::move(assigns));
}

}  // namespace dcopt
