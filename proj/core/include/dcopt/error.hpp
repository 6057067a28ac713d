#pragma once

#include <stdexcept>
#include <string>

namespace dcopt {

// Malformed input data (bad text format, bad config). Carries the 1-based
// line number when the source is line oriented, 0 otherwise.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : std::move(what)),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A caller broke an API precondition (support outside a block, mismatched
// dimensions, inconsistent cached state).
class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Arithmetic went somewhere it must not (NaN in the shared vector, a duality
// gap below the negative tolerance, a diverging estimator).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wire-level violation: bad version byte, unknown tag, truncated frame,
// round-id mismatch.
class protocol_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A worker failed or disappeared. The message names the worker.
class executor_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dcopt
