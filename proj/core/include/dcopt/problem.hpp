#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcopt/libsvm.hpp"
#include "dcopt/sparse.hpp"

namespace dcopt {

// ---------------------------------------------------------------------------
// Smooth data-fit term f. The solver only ever touches f through value,
// gradient, conjugate value, and (for the consensus baseline) the proximal
// map of the conjugate.
// ---------------------------------------------------------------------------

enum class SmoothKind : std::uint8_t {
  least_squares,   // f(v) = 1/2 |v - b|^2,              1-smooth
  logistic,        // f(v) = sum log(1 + exp(-b_j v_j)), 1-smooth for b in [-1,1]
  l1l2_conjugate,  // f = (l1 |.|_1 + l2/2 |.|^2)*, coordinate-wise
                   //   f(v) = sum ([|v_j| - l1]_+)^2 / (2 l2), (1/l2)-smooth
};

class SmoothTerm {
 public:
  static SmoothTerm least_squares(std::vector<double> b);
  static SmoothTerm logistic(std::vector<double> b);  // labels in {-1,+1}
  static SmoothTerm l1l2_conjugate(double l1_weight, double l2_weight,
                                   std::size_t dim);

  SmoothKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  // f is (1/tau)-smooth
  double tau() const { return tau_; }
  const std::vector<double>& labels() const { return b_; }
  double l1_weight() const { return l1_; }
  double l2_weight() const { return l2_; }

  double value(std::span<const double> v) const;
  void gradient(std::span<const double> v, std::span<double> w) const;
  std::vector<double> gradient(std::span<const double> v) const;
  double value_at_zero() const;

  // f*(w); +inf outside the conjugate domain
  double conjugate(std::span<const double> w) const;

  // argmin_x f*(x) + 1/(2 step) |x - z|^2
  void prox_conjugate(std::span<const double> z, double step,
                      std::span<double> out) const;

 private:
  SmoothKind kind_ = SmoothKind::least_squares;
  std::vector<double> b_;
  double l1_ = 0, l2_ = 0;
  double tau_ = 1;
  std::size_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// Separable term g(alpha) = sum_i g_i(alpha_i).
// ---------------------------------------------------------------------------

enum class SeparableKind : std::uint8_t {
  l1l2,           // l1 |a| + l2/2 a^2 (elastic net; ridge when l1 = 0)
  l1_bounded,     // lambda |a| on [-B, B], +inf outside
  ls_dual,        // 1/2 a^2 - a b_i   (squared loss seen from the dual)
  hinge_dual,     // -y_i a for y_i a in [0, 1/n], +inf outside
  absdev_dual,    // -y_i a for |a| <= 1/n, +inf outside
  logistic_dual,  // (1/n) [(-s) log(-s) + (1+s) log(1+s)], s = n a b_i in [-1,0]
};

class SeparableTerm {
 public:
  static SeparableTerm elastic_net(double lambda, double eta, std::size_t n);
  static SeparableTerm l1l2_weights(double l1_weight, double l2_weight,
                                    std::size_t n);
  static SeparableTerm l2(double lambda, std::size_t n);
  static SeparableTerm l1_bounded(double lambda, double bound, std::size_t n);
  static SeparableTerm least_squares_dual(std::vector<double> b);
  static SeparableTerm hinge_dual(std::vector<double> y, std::size_t n_total);
  static SeparableTerm absdev_dual(std::vector<double> y, std::size_t n_total);
  static SeparableTerm logistic_dual(std::vector<double> b,
                                     std::size_t n_total);
  // rebuild a dual-kind slice whose 1/n constant is already known (the wire
  // codec needs this; n_total is not recoverable from a block)
  static SeparableTerm dual_slice(SeparableKind kind, std::vector<double> y,
                                  double inv_n);

  SeparableKind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  double l1_weight() const { return l1_; }
  double l2_weight() const { return l2_; }
  double bound() const { return bound_; }
  double inv_n() const { return inv_n_; }
  const std::vector<double>& labels() const { return y_; }

  double value(std::size_t i, double a) const;
  double value_sum(std::span<const double> alpha) const;
  // g_i*(x)
  double conjugate(std::size_t i, double x) const;

  // argmin_t (quad/2) t^2 - lin t + g_i(t); quad >= 0
  double argmin_quadratic(std::size_t i, double quad, double lin) const;
  // argmin_t g_i(t) + 1/(2 step) (t - z)^2
  double prox(std::size_t i, double z, double step) const;

  // strong convexity constant of every g_i (0 if none)
  double mu() const;
  // radius of the support box (+inf when unbounded); the conjugate is
  // Lipschitz with this constant
  double bounded_support() const;

  // restriction to a sorted index subset (per-coordinate data is re-indexed;
  // scale constants such as 1/n are preserved)
  SeparableTerm slice(std::span<const std::uint32_t> idx) const;

 private:
  SeparableKind kind_ = SeparableKind::l1l2;
  double l1_ = 0, l2_ = 0;
  double bound_ = 0;
  double inv_n_ = 0;
  std::vector<double> y_;
  std::size_t n_ = 0;
};

// ---------------------------------------------------------------------------
// Mapped instance: the pair (f, g) plus the oriented matrix the solver
// actually runs on.
// ---------------------------------------------------------------------------

enum class Variant : std::uint8_t { primal, dual };

// Structure class of the user's objective. smooth_strong admits both
// variants (linear rate); smooth_nonstrong runs primal only; nonsmooth_strong
// runs dual only.
enum class ProblemCase : std::uint8_t {
  smooth_strong,
  smooth_nonstrong,
  nonsmooth_strong,
};

const char* to_string(Variant v);
const char* to_string(ProblemCase c);

struct ProblemInstance {
  SmoothTerm smooth;
  SeparableTerm separable;
  ColumnMatrix matrix;
  Variant variant = Variant::primal;
  ProblemCase problem_case = ProblemCase::smooth_nonstrong;

  std::size_t dim_shared() const { return matrix.rows(); }
  std::size_t dim_partitioned() const { return matrix.cols(); }
  void validate() const;
};

double objective_a(const ProblemInstance& p, std::span<const double> alpha);
// v must equal A alpha; with audit set this is rechecked to 1e-8.
double objective_a(const ProblemInstance& p, std::span<const double> alpha,
                   std::span<const double> v, bool audit = false);
double objective_b(const ProblemInstance& p, std::span<const double> w);
std::vector<double> map_w(const ProblemInstance& p, std::span<const double> v);

struct GapValue {
  double gap;          // clamped to [0, inf)
  double raw;          // objective_a + objective_b before clamping
  double objective_a;
  double objective_b;
};

// Throws numerical_error when the raw gap is below -1e-9.
GapValue duality_gap(const ProblemInstance& p, std::span<const double> alpha);
GapValue duality_gap(const ProblemInstance& p, std::span<const double> alpha,
                     std::span<const double> v);

// ---------------------------------------------------------------------------
// User-facing regularized-loss description, before the primal/dual mapping.
// ---------------------------------------------------------------------------

enum class LossKind : std::uint8_t { squared, logistic, hinge, absolute };

struct InputProblem {
  LossKind loss = LossKind::squared;
  // penalty(u) = l1_weight |u|_1 + l2_weight/2 |u|^2
  double l1_weight = 0;
  double l2_weight = 0;

  static InputProblem lasso(double lambda);
  static InputProblem elastic_net(double lambda, double eta);
  static InputProblem ridge(double lambda);
  static InputProblem svm_hinge(double lambda);
  static InputProblem absolute_deviation(double lambda);
  static InputProblem logistic_l1(double lambda);
  static InputProblem logistic_l2(double lambda);

  bool loss_smooth() const {
    return loss == LossKind::squared || loss == LossKind::logistic;
  }
  bool loss_separable() const { return true; }
  bool reg_strongly_convex() const { return l2_weight > 0; }
  bool reg_separable() const { return true; }
};

// Replaces a pure-L1 penalty by l1 |u| + delta/2 u^2 so the instance becomes
// strongly convex (and thus eligible for the dual variant). delta = 0 is the
// identity.
InputProblem smoothing_wrap(const InputProblem& p, double delta);

struct CaseVariant {
  ProblemCase problem_case;
  Variant variant;
};

// Case classification plus the default variant choice. Throws
// std::invalid_argument for the unsupported class (non-smooth loss with a
// regularizer that is not strongly convex).
CaseVariant choose_variant(bool loss_smooth, bool loss_separable,
                           bool reg_strongly_convex, bool reg_separable,
                           std::size_t n_features, std::size_t n_examples);
CaseVariant choose_variant(const InputProblem& p, std::size_t n_features,
                           std::size_t n_examples);

struct BuildOptions {
  // override for the L1 box radius; default is f(0)/lambda
  std::optional<double> bound_override;
};

// Maps the user problem onto (f, g, A) for the requested variant. The dataset
// is re-oriented as needed (primal: features as columns, dual: samples as
// columns).
ProblemInstance build_instance(const InputProblem& input, const Dataset& data,
                               Variant variant, const BuildOptions& opts = {});

// Value of the user-facing objective loss(X u, labels) + penalty(u) at a
// model vector, independent of any variant mapping.
double input_objective(const InputProblem& input, const Dataset& data,
                       std::span<const double> model);

}  // namespace dcopt
