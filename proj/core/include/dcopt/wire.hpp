#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcopt/executor.hpp"
#include "dcopt/libsvm.hpp"
#include "dcopt/worker.hpp"

namespace dcopt {

// Coordinator/worker protocol. Every frame is a 4-byte little-endian payload
// length, a 1-byte tag, then the payload. Vectors travel as a 4-byte LE
// element count followed by 8-byte LE IEEE-754 doubles; strings as a 4-byte
// LE length followed by raw bytes.

inline constexpr std::uint8_t wire_version = 1;
inline constexpr std::size_t frame_header_bytes = 5;
// Refuse absurd length fields before allocating.
inline constexpr std::uint32_t max_frame_payload = 1u << 30;

enum class Tag : std::uint8_t {
  hello = 0x01,        // version handshake, echoed by the worker
  assign = 0x02,       // worker's job description; empty frame back as ack
  broadcast_v = 0x03,  // round id, flags, shared vector
  result_dv = 0x04,    // round id, steps, audit scalars, delta-v
  done = 0x05,         // shut down
  error = 0x06,        // message, then the sender closes
  fetch_alpha = 0x07,  // post-run retrieval of the worker's coefficients
  result_alpha = 0x08,
};

struct Frame {
  Tag tag;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);
// Parses `bytes` as one complete frame (header + payload, nothing left over).
Frame decode_frame(std::span<const std::uint8_t> bytes);

// -- payload codecs ---------------------------------------------------------

struct BroadcastPayload {
  std::uint32_t round_id = 0;
  RoundFlags flags;
  std::vector<double> v;
};

struct ResultDvPayload {
  std::uint32_t round_id = 0;
  std::uint32_t steps = 0;
  double g_sum = 0;
  double conj_sum = 0;
  double theta = 0;  // NaN when unmeasured
  std::vector<double> delta_v;  // empty on eval-only rounds
};

// The worker's job description, flattened for transport. data_mode 0 ships
// the block's columns inline; data_mode 1 names a dataset file the worker
// loads itself, from which columns and any label vectors sent empty are
// completed.
struct AssignPayload {
  std::uint8_t data_mode = 0;
  std::uint32_t worker_id = 0;
  std::uint32_t k_blocks = 1;
  double gamma = 1;
  double sigma_prime = 1;
  LocalSolverConfig solver;
  std::uint32_t avg_start = 0;
  std::uint32_t theta_oracle_passes = 200;
  std::uint64_t n_rows = 0;
  std::vector<std::uint32_t> index;  // global column ids, ascending

  std::uint8_t smooth_kind = 0;
  std::uint64_t smooth_dim = 0;
  double smooth_l1 = 0, smooth_l2 = 0;
  std::vector<double> smooth_labels;

  std::uint8_t sep_kind = 0;
  double sep_l1 = 0, sep_l2 = 0, sep_bound = 0, sep_inv_n = 0;
  std::vector<double> sep_labels;

  std::vector<SparseColumn> columns;  // mode 0
  std::string data_path;              // mode 1
  Orientation orientation = Orientation::samples_as_columns;  // mode 1
};

// Flattens a ready WorkerInit (mode 0) or its data-path form (mode 1, labels
// and columns stripped — the worker re-derives them).
AssignPayload make_assign(const WorkerInit& init);
AssignPayload make_assign_by_path(const WorkerInit& init,
                                  const std::string& data_path,
                                  Orientation orientation);

Frame encode_assign(const AssignPayload& p);
AssignPayload decode_assign(const Frame& f);
Frame encode_assign_ack();

// Rebuilds the runnable WorkerInit. `preloaded` is required for mode 1 and
// must be the dataset named by data_path.
WorkerInit complete_assign(const AssignPayload& p, const Dataset* preloaded);

Frame encode_hello(std::uint8_t version = wire_version);
std::uint8_t decode_hello(const Frame& f);

Frame encode_broadcast(const BroadcastPayload& p);
BroadcastPayload decode_broadcast(const Frame& f);

Frame encode_result_dv(const ResultDvPayload& p);
ResultDvPayload decode_result_dv(const Frame& f);

Frame encode_done();

Frame encode_error(const std::string& message);
std::string decode_error(const Frame& f);

Frame encode_fetch_alpha(AlphaKind kind);
AlphaKind decode_fetch_alpha(const Frame& f);

Frame encode_result_alpha(std::span<const double> alpha);
std::vector<double> decode_result_alpha(const Frame& f);

// -- exact frame sizes, used for byte accounting ----------------------------

// 14 + 8 d: header + round + flags + vector
std::size_t broadcast_frame_bytes(std::size_t shared_dim);
// 41 + 8 d: header + round + steps + three scalars + vector (d = 0 when
// eval-only)
std::size_t result_frame_bytes(std::size_t shared_dim);

}  // namespace dcopt
