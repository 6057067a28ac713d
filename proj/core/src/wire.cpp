#include "dcopt/wire.hpp"

#include <cstring>

#include "dcopt/error.hpp"

namespace dcopt {

namespace {

class Writer {
 public:
  void u8(std::uint8_t x) { buf_.push_back(x); }
  void u32(std::uint32_t x) {
    for (int i = 0; i < 4; ++i) buf_.push_back((x >> (8 * i)) & 0xff);
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) buf_.push_back((x >> (8 * i)) & 0xff);
  }
  void f64(double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    u64(bits);
  }
  void vec(std::span<const double> v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) f64(x);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i)
      x |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i)
      x |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return x;
  }
  double f64() {
    std::uint64_t bits = u64();
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  }
  std::vector<double> vec() {
    std::uint32_t count = u32();
    need(std::size_t{count} * 8);
    std::vector<double> v(count);
    for (auto& x : v) x = f64();
    return v;
  }
  std::string str() {
    std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  void finish() const {
    if (pos_ != bytes_.size())
      throw protocol_error("payload has trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw protocol_error("truncated payload");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void expect_tag(const Frame& f, Tag tag) {
  if (f.tag != tag) throw protocol_error("unexpected frame tag");
}

std::uint8_t flags_byte(RoundFlags flags) {
  return static_cast<std::uint8_t>((flags.eval_only ? 1 : 0) |
                                   (flags.measure_theta ? 2 : 0));
}

RoundFlags flags_from_byte(std::uint8_t b) {
  if (b & ~3u) throw protocol_error("unknown round flags");
  RoundFlags f;
  f.eval_only = b & 1;
  f.measure_theta = b & 2;
  return f;
}

bool smooth_kind_has_labels(std::uint8_t kind) {
  return static_cast<SmoothKind>(kind) != SmoothKind::l1l2_conjugate;
}

bool sep_kind_has_labels(std::uint8_t kind) {
  auto k = static_cast<SeparableKind>(kind);
  return k != SeparableKind::l1l2 && k != SeparableKind::l1_bounded;
}

SmoothTerm smooth_from_fields(const AssignPayload& p,
                              std::vector<double> labels) {
  switch (static_cast<SmoothKind>(p.smooth_kind)) {
    case SmoothKind::least_squares:
      if (labels.size() != p.smooth_dim)
        throw protocol_error("assign: least-squares label count");
      return SmoothTerm::least_squares(std::move(labels));
    case SmoothKind::logistic:
      if (labels.size() != p.smooth_dim)
        throw protocol_error("assign: logistic label count");
      return SmoothTerm::logistic(std::move(labels));
    case SmoothKind::l1l2_conjugate:
      return SmoothTerm::l1l2_conjugate(p.smooth_l1, p.smooth_l2,
                                        p.smooth_dim);
  }
  throw protocol_error("assign: unknown smooth kind");
}

SeparableTerm separable_from_fields(const AssignPayload& p,
                                    std::vector<double> y, std::size_t n) {
  switch (static_cast<SeparableKind>(p.sep_kind)) {
    case SeparableKind::l1l2:
      return SeparableTerm::l1l2_weights(p.sep_l1, p.sep_l2, n);
    case SeparableKind::l1_bounded:
      return SeparableTerm::l1_bounded(p.sep_l1, p.sep_bound, n);
    case SeparableKind::ls_dual:
      if (y.size() != n) throw protocol_error("assign: ls-dual label count");
      return SeparableTerm::least_squares_dual(std::move(y));
    case SeparableKind::hinge_dual:
    case SeparableKind::absdev_dual:
    case SeparableKind::logistic_dual:
      if (y.size() != n) throw protocol_error("assign: dual label count");
      return SeparableTerm::dual_slice(static_cast<SeparableKind>(p.sep_kind),
                                       std::move(y), p.sep_inv_n);
  }
  throw protocol_error("assign: unknown separable kind");
}

AssignPayload flatten(const WorkerInit& init) {
  AssignPayload p;
  p.worker_id = init.worker_id;
  p.k_blocks = init.k_blocks;
  p.gamma = init.gamma;
  p.sigma_prime = init.sigma_prime;
  p.solver = init.solver;
  p.avg_start = init.avg_start;
  p.theta_oracle_passes = init.theta_oracle_passes;
  p.n_rows = init.columns.rows() ? init.columns.rows() : init.smooth.dim();
  p.index = init.index;
  p.smooth_kind = static_cast<std::uint8_t>(init.smooth.kind());
  p.smooth_dim = init.smooth.dim();
  p.smooth_l1 = init.smooth.l1_weight();
  p.smooth_l2 = init.smooth.l2_weight();
  p.smooth_labels = init.smooth.labels();
  p.sep_kind = static_cast<std::uint8_t>(init.separable.kind());
  p.sep_l1 = init.separable.l1_weight();
  p.sep_l2 = init.separable.l2_weight();
  p.sep_bound = init.separable.bound();
  p.sep_inv_n = init.separable.inv_n();
  p.sep_labels = init.separable.labels();
  return p;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  std::vector<std::uint8_t> out;
  out.reserve(frame_header_bytes + f.payload.size());
  auto len = static_cast<std::uint32_t>(f.payload.size());
  for (int i = 0; i < 4; ++i) out.push_back((len >> (8 * i)) & 0xff);
  out.push_back(static_cast<std::uint8_t>(f.tag));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < frame_header_bytes)
    throw protocol_error("truncated frame header");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  if (len > max_frame_payload) throw protocol_error("frame length too large");
  std::uint8_t tag = bytes[4];
  if (tag < 0x01 || tag > 0x08) throw protocol_error("unknown frame tag");
  if (bytes.size() != frame_header_bytes + len)
    throw protocol_error("frame length mismatch");
  Frame f;
  f.tag = static_cast<Tag>(tag);
  f.payload.assign(bytes.begin() + frame_header_bytes, bytes.end());
  return f;
}

AssignPayload make_assign(const WorkerInit& init) {
  AssignPayload p = flatten(init);
  p.data_mode = 0;
  p.columns.reserve(init.columns.cols());
  for (std::size_t j = 0; j < init.columns.cols(); ++j)
    p.columns.push_back(init.columns.column(j));
  return p;
}

AssignPayload make_assign_by_path(const WorkerInit& init,
                                  const std::string& data_path,
                                  Orientation orientation) {
  AssignPayload p = flatten(init);
  p.data_mode = 1;
  p.data_path = data_path;
  p.orientation = orientation;
  // The worker re-derives label vectors from its own copy of the data.
  p.smooth_labels.clear();
  p.sep_labels.clear();
  return p;
}

Frame encode_assign(const AssignPayload& p) {
  Writer w;
  w.u8(p.data_mode);
  w.u32(p.worker_id);
  w.u32(p.k_blocks);
  w.f64(p.gamma);
  w.f64(p.sigma_prime);
  w.u32(static_cast<std::uint32_t>(p.solver.passes_H));
  w.u64(p.solver.rng_seed);
  w.u8(p.solver.shuffle ? 1 : 0);
  w.u8(p.solver.check_monotone ? 1 : 0);
  w.u32(p.avg_start);
  w.u32(p.theta_oracle_passes);
  w.u64(p.n_rows);

  w.u32(static_cast<std::uint32_t>(p.index.size()));
  for (std::uint32_t idx : p.index) w.u32(idx);

  w.u8(p.smooth_kind);
  w.u64(p.smooth_dim);
  w.f64(p.smooth_l1);
  w.f64(p.smooth_l2);
  w.vec(p.smooth_labels);

  w.u8(p.sep_kind);
  w.f64(p.sep_l1);
  w.f64(p.sep_l2);
  w.f64(p.sep_bound);
  w.f64(p.sep_inv_n);
  w.vec(p.sep_labels);

  if (p.data_mode == 0) {
    if (p.columns.size() != p.index.size())
      throw contract_error("assign: column count != index count");
    for (const auto& col : p.columns) {
      w.u32(static_cast<std::uint32_t>(col.size()));
      for (const auto& e : col) {
        w.u32(e.row);
        w.f64(e.value);
      }
    }
  } else {
    w.str(p.data_path);
    w.u8(p.orientation == Orientation::samples_as_columns ? 0 : 1);
  }
  return Frame{Tag::assign, w.take()};
}

AssignPayload decode_assign(const Frame& f) {
  expect_tag(f, Tag::assign);
  Reader r(f.payload);
  AssignPayload p;
  p.data_mode = r.u8();
  if (p.data_mode > 1) throw protocol_error("assign: unknown data mode");
  p.worker_id = r.u32();
  p.k_blocks = r.u32();
  p.gamma = r.f64();
  p.sigma_prime = r.f64();
  p.solver.passes_H = r.u32();
  p.solver.rng_seed = r.u64();
  p.solver.shuffle = r.u8() != 0;
  p.solver.check_monotone = r.u8() != 0;
  p.avg_start = r.u32();
  p.theta_oracle_passes = r.u32();
  p.n_rows = r.u64();

  std::uint32_t n_cols = r.u32();
  p.index.resize(n_cols);
  for (auto& idx : p.index) idx = r.u32();

  p.smooth_kind = r.u8();
  p.smooth_dim = r.u64();
  p.smooth_l1 = r.f64();
  p.smooth_l2 = r.f64();
  p.smooth_labels = r.vec();

  p.sep_kind = r.u8();
  p.sep_l1 = r.f64();
  p.sep_l2 = r.f64();
  p.sep_bound = r.f64();
  p.sep_inv_n = r.f64();
  p.sep_labels = r.vec();

  if (p.data_mode == 0) {
    p.columns.resize(n_cols);
    for (auto& col : p.columns) {
      std::uint32_t nnz = r.u32();
      col.resize(nnz);
      for (auto& e : col) {
        e.row = r.u32();
        e.value = r.f64();
      }
    }
  } else {
    p.data_path = r.str();
    p.orientation = r.u8() == 0 ? Orientation::samples_as_columns
                                : Orientation::features_as_columns;
  }
  r.finish();
  return p;
}

Frame encode_assign_ack() { return Frame{Tag::assign, {}}; }

WorkerInit complete_assign(const AssignPayload& p, const Dataset* preloaded) {
  WorkerInit init;
  init.worker_id = p.worker_id;
  init.k_blocks = p.k_blocks;
  init.gamma = p.gamma;
  init.sigma_prime = p.sigma_prime;
  init.solver = p.solver;
  init.avg_start = p.avg_start;
  init.theta_oracle_passes = p.theta_oracle_passes;
  init.index = p.index;

  if (p.data_mode == 0) {
    init.columns = ColumnMatrix(p.n_rows, p.columns);
    init.smooth = smooth_from_fields(p, p.smooth_labels);
    init.separable = separable_from_fields(p, p.sep_labels, p.index.size());
    return init;
  }

  if (!preloaded)
    throw protocol_error(
        "assign names a data path but this worker was started without --data");
  Dataset data = reorient(*preloaded, p.orientation);
  if (data.matrix.rows() != p.n_rows)
    throw protocol_error("assign: preloaded data has the wrong row count");
  for (std::uint32_t idx : p.index)
    if (idx >= data.matrix.cols())
      throw protocol_error("assign: column index outside preloaded data");
  init.columns = data.matrix.select_columns(p.index);

  std::vector<double> smooth_labels = p.smooth_labels;
  if (smooth_kind_has_labels(p.smooth_kind) && smooth_labels.empty())
    smooth_labels = data.labels;
  init.smooth = smooth_from_fields(p, std::move(smooth_labels));

  std::vector<double> sep_labels = p.sep_labels;
  if (sep_kind_has_labels(p.sep_kind) && sep_labels.empty()) {
    sep_labels.reserve(p.index.size());
    for (std::uint32_t idx : p.index) sep_labels.push_back(data.labels[idx]);
  }
  init.separable = separable_from_fields(p, std::move(sep_labels),
                                         p.index.size());
  return init;
}

Frame encode_hello(std::uint8_t version) {
  Writer w;
  w.u8(version);
  return Frame{Tag::hello, w.take()};
}

std::uint8_t decode_hello(const Frame& f) {
  expect_tag(f, Tag::hello);
  Reader r(f.payload);
  std::uint8_t version = r.u8();
  r.finish();
  return version;
}

Frame encode_broadcast(const BroadcastPayload& p) {
  Writer w;
  w.u32(p.round_id);
  w.u8(flags_byte(p.flags));
  w.vec(p.v);
  return Frame{Tag::broadcast_v, w.take()};
}

BroadcastPayload decode_broadcast(const Frame& f) {
  expect_tag(f, Tag::broadcast_v);
  Reader r(f.payload);
  BroadcastPayload p;
  p.round_id = r.u32();
  p.flags = flags_from_byte(r.u8());
  p.v = r.vec();
  r.finish();
  return p;
}

Frame encode_result_dv(const ResultDvPayload& p) {
  Writer w;
  w.u32(p.round_id);
  w.u32(p.steps);
  w.f64(p.g_sum);
  w.f64(p.conj_sum);
  w.f64(p.theta);
  w.vec(p.delta_v);
  return Frame{Tag::result_dv, w.take()};
}

ResultDvPayload decode_result_dv(const Frame& f) {
  expect_tag(f, Tag::result_dv);
  Reader r(f.payload);
  ResultDvPayload p;
  p.round_id = r.u32();
  p.steps = r.u32();
  p.g_sum = r.f64();
  p.conj_sum = r.f64();
  p.theta = r.f64();
  p.delta_v = r.vec();
  r.finish();
  return p;
}

Frame encode_done() { return Frame{Tag::done, {}}; }

Frame encode_error(const std::string& message) {
  Writer w;
  w.str(message);
  return Frame{Tag::error, w.take()};
}

std::string decode_error(const Frame& f) {
  expect_tag(f, Tag::error);
  Reader r(f.payload);
  std::string msg = r.str();
  r.finish();
  return msg;
}

Frame encode_fetch_alpha(AlphaKind kind) {
  Writer w;
  w.u8(kind == AlphaKind::last ? 0 : 1);
  return Frame{Tag::fetch_alpha, w.take()};
}

AlphaKind decode_fetch_alpha(const Frame& f) {
  expect_tag(f, Tag::fetch_alpha);
  Reader r(f.payload);
  std::uint8_t mode = r.u8();
  r.finish();
  if (mode > 1) throw protocol_error("fetch-alpha: unknown mode");
  return mode == 0 ? AlphaKind::last : AlphaKind::averaged;
}

Frame encode_result_alpha(std::span<const double> alpha) {
  Writer w;
  w.vec(alpha);
  return Frame{Tag::result_alpha, w.take()};
}

std::vector<double> decode_result_alpha(const Frame& f) {
  expect_tag(f, Tag::result_alpha);
  Reader r(f.payload);
  std::vector<double> alpha = r.vec();
  r.finish();
  return alpha;
}

std::size_t broadcast_frame_bytes(std::size_t shared_dim) {
  return frame_header_bytes + 4 + 1 + 4 + 8 * shared_dim;
}

std::size_t result_frame_bytes(std::size_t shared_dim) {
  return frame_header_bytes + 4 + 4 + 8 * 3 + 4 + 8 * shared_dim;
}

}  // namespace dcopt
