#include "dcopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcopt/error.hpp"

namespace dcopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// log(1 + exp(-s)) without overflow
double log1p_exp_neg(double s) {
  if (s > 0) return std::log1p(std::exp(-s));
  return -s + std::log1p(std::exp(s));
}

// 1 / (1 + exp(s)) without overflow
double sigmoid_neg(double s) {
  if (s > 0) {
    double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

void require_pm1_labels(const std::vector<double>& y, const char* who) {
  for (double v : y)
    if (v != 1.0 && v != -1.0)
      throw std::invalid_argument(std::string(who) +
                                  ": labels must be exactly +1 or -1");
}

}  // namespace

// --------------------------------------------------------------------------
// SmoothTerm
// --------------------------------------------------------------------------

SmoothTerm SmoothTerm::least_squares(std::vector<double> b) {
  SmoothTerm f;
  f.kind_ = SmoothKind::least_squares;
  f.dim_ = b.size();
  f.b_ = std::move(b);
  f.tau_ = 1.0;
  return f;
}

SmoothTerm SmoothTerm::logistic(std::vector<double> b) {
  require_pm1_labels(b, "logistic");
  SmoothTerm f;
  f.kind_ = SmoothKind::logistic;
  f.dim_ = b.size();
  f.b_ = std::move(b);
  f.tau_ = 1.0;
  return f;
}

SmoothTerm SmoothTerm::l1l2_conjugate(double l1_weight, double l2_weight,
                                      std::size_t dim) {
  if (l1_weight < 0 || l2_weight <= 0)
    throw std::invalid_argument(
        "l1l2_conjugate: needs l1 >= 0 and l2 > 0 (strong convexity)");
  SmoothTerm f;
  f.kind_ = SmoothKind::l1l2_conjugate;
  f.dim_ = dim;
  f.l1_ = l1_weight;
  f.l2_ = l2_weight;
  f.tau_ = l2_weight;
  return f;
}

double SmoothTerm::value(std::span<const double> v) const {
  if (v.size() != dim_) throw contract_error("smooth value: dim mismatch");
  double s = 0;
  switch (kind_) {
    case SmoothKind::least_squares:
      for (std::size_t j = 0; j < dim_; ++j) {
        double r = v[j] - b_[j];
        s += 0.5 * r * r;
      }
      return s;
    case SmoothKind::logistic:
      for (std::size_t j = 0; j < dim_; ++j) s += log1p_exp_neg(b_[j] * v[j]);
      return s;
    case SmoothKind::l1l2_conjugate:
      for (std::size_t j = 0; j < dim_; ++j) {
        double t = std::max(std::abs(v[j]) - l1_, 0.0);
        s += t * t / (2.0 * l2_);
      }
      return s;
  }
  return s;
}

void SmoothTerm::gradient(std::span<const double> v,
                          std::span<double> w) const {
  if (v.size() != dim_ || w.size() != dim_)
    throw contract_error("smooth gradient: dim mismatch");
  switch (kind_) {
    case SmoothKind::least_squares:
      for (std::size_t j = 0; j < dim_; ++j) w[j] = v[j] - b_[j];
      return;
    case SmoothKind::logistic:
      for (std::size_t j = 0; j < dim_; ++j)
        w[j] = -b_[j] * sigmoid_neg(b_[j] * v[j]);
      return;
    case SmoothKind::l1l2_conjugate:
      for (std::size_t j = 0; j < dim_; ++j) {
        double t = std::max(std::abs(v[j]) - l1_, 0.0);
        w[j] = v[j] > 0 ? t / l2_ : -t / l2_;
      }
      return;
  }
}

std::vector<double> SmoothTerm::gradient(std::span<const double> v) const {
  std::vector<double> w(dim_);
  gradient(v, w);
  return w;
}

double SmoothTerm::value_at_zero() const {
  switch (kind_) {
    case SmoothKind::least_squares: {
      double s = 0;
      for (double x : b_) s += 0.5 * x * x;
      return s;
    }
    case SmoothKind::logistic:
      return static_cast<double>(dim_) * std::log(2.0);
    case SmoothKind::l1l2_conjugate:
      return 0.0;
  }
  return 0.0;
}

double SmoothTerm::conjugate(std::span<const double> w) const {
  if (w.size() != dim_) throw contract_error("smooth conjugate: dim mismatch");
  double s = 0;
  switch (kind_) {
    case SmoothKind::least_squares:
      for (std::size_t j = 0; j < dim_; ++j)
        s += 0.5 * w[j] * w[j] + w[j] * b_[j];
      return s;
    case SmoothKind::logistic:
      // f*(w) = sum s log s + (1-s) log(1-s) with s = -b_j w_j in [0,1]
      for (std::size_t j = 0; j < dim_; ++j) {
        double t = -b_[j] * w[j];
        if (t < 0.0 || t > 1.0) return kInf;
        s += xlogx(t) + xlogx(1.0 - t);
      }
      return s;
    case SmoothKind::l1l2_conjugate:
      for (std::size_t j = 0; j < dim_; ++j)
        s += l1_ * std::abs(w[j]) + 0.5 * l2_ * w[j] * w[j];
      return s;
  }
  return s;
}

void SmoothTerm::prox_conjugate(std::span<const double> z, double step,
                                std::span<double> out) const {
  if (z.size() != dim_ || out.size() != dim_)
    throw contract_error("prox_conjugate: dim mismatch");
  if (step <= 0) throw std::invalid_argument("prox_conjugate: step <= 0");
  switch (kind_) {
    case SmoothKind::least_squares:
      for (std::size_t j = 0; j < dim_; ++j)
        out[j] = (z[j] - step * b_[j]) / (1.0 + step);
      return;
    case SmoothKind::l1l2_conjugate:
      for (std::size_t j = 0; j < dim_; ++j)
        out[j] = soft_threshold(z[j], step * l1_) / (1.0 + step * l2_);
      return;
    case SmoothKind::logistic:
      throw contract_error(
          "prox_conjugate: not available for the logistic data term");
  }
}

// --------------------------------------------------------------------------
// SeparableTerm
// --------------------------------------------------------------------------

SeparableTerm SeparableTerm::elastic_net(double lambda, double eta,
                                         std::size_t n) {
  if (lambda <= 0) throw std::invalid_argument("elastic_net: lambda <= 0");
  if (eta < 0 || eta >= 1)
    throw std::invalid_argument(
        "elastic_net: eta must be in [0,1); use l1_bounded for pure L1");
  return l1l2_weights(eta * lambda, (1.0 - eta) * lambda, n);
}

SeparableTerm SeparableTerm::l1l2_weights(double l1_weight, double l2_weight,
                                          std::size_t n) {
  if (l1_weight < 0 || l2_weight <= 0)
    throw std::invalid_argument("l1l2: needs l1 >= 0 and l2 > 0");
  SeparableTerm g;
  g.kind_ = SeparableKind::l1l2;
  g.l1_ = l1_weight;
  g.l2_ = l2_weight;
  g.n_ = n;
  return g;
}

SeparableTerm SeparableTerm::l2(double lambda, std::size_t n) {
  return l1l2_weights(0.0, lambda, n);
}

SeparableTerm SeparableTerm::l1_bounded(double lambda, double bound,
                                        std::size_t n) {
  if (lambda <= 0) throw std::invalid_argument("l1_bounded: lambda <= 0");
  if (!(bound > 0)) throw std::invalid_argument("l1_bounded: bound <= 0");
  SeparableTerm g;
  g.kind_ = SeparableKind::l1_bounded;
  g.l1_ = lambda;
  g.bound_ = bound;
  g.n_ = n;
  return g;
}

SeparableTerm SeparableTerm::least_squares_dual(std::vector<double> b) {
  SeparableTerm g;
  g.kind_ = SeparableKind::ls_dual;
  g.n_ = b.size();
  g.y_ = std::move(b);
  return g;
}

SeparableTerm SeparableTerm::hinge_dual(std::vector<double> y,
                                        std::size_t n_total) {
  require_pm1_labels(y, "hinge_dual");
  if (n_total == 0) throw std::invalid_argument("hinge_dual: n_total == 0");
  SeparableTerm g;
  g.kind_ = SeparableKind::hinge_dual;
  g.n_ = y.size();
  g.y_ = std::move(y);
  g.inv_n_ = 1.0 / static_cast<double>(n_total);
  return g;
}

SeparableTerm SeparableTerm::absdev_dual(std::vector<double> y,
                                         std::size_t n_total) {
  if (n_total == 0) throw std::invalid_argument("absdev_dual: n_total == 0");
  SeparableTerm g;
  g.kind_ = SeparableKind::absdev_dual;
  g.n_ = y.size();
  g.y_ = std::move(y);
  g.inv_n_ = 1.0 / static_cast<double>(n_total);
  return g;
}

SeparableTerm SeparableTerm::logistic_dual(std::vector<double> b,
                                           std::size_t n_total) {
  require_pm1_labels(b, "logistic_dual");
  if (n_total == 0) throw std::invalid_argument("logistic_dual: n_total == 0");
  SeparableTerm g;
  g.kind_ = SeparableKind::logistic_dual;
  g.n_ = b.size();
  g.y_ = std::move(b);
  g.inv_n_ = 1.0 / static_cast<double>(n_total);
  return g;
}

SeparableTerm SeparableTerm::dual_slice(SeparableKind kind,
                                        std::vector<double> y, double inv_n) {
  if (!(inv_n > 0)) throw std::invalid_argument("dual_slice: inv_n <= 0");
  if (kind == SeparableKind::hinge_dual ||
      kind == SeparableKind::logistic_dual)
    require_pm1_labels(y, "dual_slice");
  if (kind != SeparableKind::hinge_dual &&
      kind != SeparableKind::absdev_dual &&
      kind != SeparableKind::logistic_dual)
    throw std::invalid_argument("dual_slice: not a 1/n dual kind");
  SeparableTerm g;
  g.kind_ = kind;
  g.n_ = y.size();
  g.y_ = std::move(y);
  g.inv_n_ = inv_n;
  return g;
}

double SeparableTerm::value(std::size_t i, double a) const {
  switch (kind_) {
    case SeparableKind::l1l2:
      return l1_ * std::abs(a) + 0.5 * l2_ * a * a;
    case SeparableKind::l1_bounded:
      if (std::abs(a) > bound_) return kInf;
      return l1_ * std::abs(a);
    case SeparableKind::ls_dual:
      return 0.5 * a * a - a * y_[i];
    case SeparableKind::hinge_dual: {
      double t = y_[i] * a;
      if (t < 0.0 || t > inv_n_) return kInf;
      return -t;
    }
    case SeparableKind::absdev_dual:
      if (std::abs(a) > inv_n_) return kInf;
      return -y_[i] * a;
    case SeparableKind::logistic_dual: {
      double s = a * y_[i] / inv_n_;
      if (s < -1.0 || s > 0.0) return kInf;
      return inv_n_ * (xlogx(-s) + xlogx(1.0 + s));
    }
  }
  return 0;
}

double SeparableTerm::value_sum(std::span<const double> alpha) const {
  if (alpha.size() != n_) throw contract_error("value_sum: length mismatch");
  double s = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    s += value(i, alpha[i]);
    if (s == kInf) return kInf;
  }
  return s;
}

double SeparableTerm::conjugate(std::size_t i, double x) const {
  switch (kind_) {
    case SeparableKind::l1l2: {
      double t = std::max(std::abs(x) - l1_, 0.0);
      return t * t / (2.0 * l2_);
    }
    case SeparableKind::l1_bounded:
      return bound_ * std::max(std::abs(x) - l1_, 0.0);
    case SeparableKind::ls_dual: {
      double t = x + y_[i];
      return 0.5 * t * t;
    }
    case SeparableKind::hinge_dual:
      return inv_n_ * std::max(0.0, 1.0 + y_[i] * x);
    case SeparableKind::absdev_dual:
      return inv_n_ * std::abs(x + y_[i]);
    case SeparableKind::logistic_dual:
      return inv_n_ * log1p_exp_neg(y_[i] * x);
  }
  return 0;
}

namespace {

// Root of q s - l + log((1+s)/(-s)) on (-1, 0): Newton with a bisection
// safeguard. The derivative term is the gradient of the binary-entropy
// conjugate, so the root is always interior.
double entropy_root(double q, double l) {
  double lo = -1.0, hi = 0.0;
  double s = -0.5;
  for (int it = 0; it < 80; ++it) {
    double d1 = q * s - l + std::log1p(s) - std::log(-s);
    if (d1 > 0)
      hi = s;
    else
      lo = s;
    double d2 = q + 1.0 / (1.0 + s) - 1.0 / s;
    double step = d1 / d2;
    double next = s - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-16 * std::abs(s)) {
      s = next;
      break;
    }
    s = next;
  }
  return s;
}

}  // namespace

double SeparableTerm::argmin_quadratic(std::size_t i, double quad,
                                       double lin) const {
  switch (kind_) {
    case SeparableKind::l1l2:
      return soft_threshold(lin, l1_) / (quad + l2_);
    case SeparableKind::l1_bounded: {
      if (quad <= 0) {
        if (std::abs(lin) <= l1_) return 0.0;
        return lin > 0 ? bound_ : -bound_;
      }
      return std::clamp(soft_threshold(lin, l1_) / quad, -bound_, bound_);
    }
    case SeparableKind::ls_dual:
      return (lin + y_[i]) / (quad + 1.0);
    case SeparableKind::hinge_dual: {
      double y = y_[i];
      if (quad <= 0) {
        double c = (lin + y) * y;
        return y * (c > 0 ? inv_n_ : 0.0);
      }
      double t = (lin + y) / quad;
      return y * std::clamp(y * t, 0.0, inv_n_);
    }
    case SeparableKind::absdev_dual: {
      if (quad <= 0) {
        double c = lin + y_[i];
        if (c == 0) return 0.0;
        return c > 0 ? inv_n_ : -inv_n_;
      }
      return std::clamp((lin + y_[i]) / quad, -inv_n_, inv_n_);
    }
    case SeparableKind::logistic_dual: {
      // substitute s = a b / inv_n in [-1, 0]
      double b = y_[i];
      double s = entropy_root(quad * inv_n_, lin * b);
      return s * b * inv_n_;
    }
  }
  return 0;
}

double SeparableTerm::prox(std::size_t i, double z, double step) const {
  if (step <= 0) throw std::invalid_argument("prox: step <= 0");
  return argmin_quadratic(i, 1.0 / step, z / step);
}

double SeparableTerm::mu() const {
  switch (kind_) {
    case SeparableKind::l1l2:
      return l2_;
    case SeparableKind::ls_dual:
      return 1.0;
    case SeparableKind::logistic_dual:
      return 4.0 / inv_n_;
    default:
      return 0.0;
  }
}

double SeparableTerm::bounded_support() const {
  switch (kind_) {
    case SeparableKind::l1_bounded:
      return bound_;
    case SeparableKind::hinge_dual:
    case SeparableKind::absdev_dual:
    case SeparableKind::logistic_dual:
      return inv_n_;
    default:
      return kInf;
  }
}

SeparableTerm SeparableTerm::slice(std::span<const std::uint32_t> idx) const {
  SeparableTerm g = *this;
  g.n_ = idx.size();
  if (!y_.empty()) {
    g.y_.clear();
    g.y_.reserve(idx.size());
    for (std::uint32_t j : idx) {
      if (j >= n_) throw contract_error("slice: index out of range");
      g.y_.push_back(y_[j]);
    }
  }
  return g;
}

// --------------------------------------------------------------------------
// ProblemInstance and objectives
// --------------------------------------------------------------------------

const char* to_string(Variant v) {
  return v == Variant::primal ? "primal" : "dual";
}

const char* to_string(ProblemCase c) {
  switch (c) {
    case ProblemCase::smooth_strong:
      return "smooth loss + strongly convex regularizer";
    case ProblemCase::smooth_nonstrong:
      return "smooth loss + separable regularizer";
    case ProblemCase::nonsmooth_strong:
      return "separable loss + strongly convex regularizer";
  }
  return "?";
}

void ProblemInstance::validate() const {
  matrix.validate();
  if (smooth.dim() != matrix.rows())
    throw contract_error("instance: smooth term dimension != matrix rows");
  if (separable.size() != matrix.cols())
    throw contract_error("instance: separable term size != matrix cols");
  if (problem_case == ProblemCase::smooth_nonstrong &&
      variant != Variant::primal)
    throw contract_error("instance: this class must run the primal variant");
  if (problem_case == ProblemCase::nonsmooth_strong &&
      variant != Variant::dual)
    throw contract_error("instance: this class must run the dual variant");
}

double objective_a(const ProblemInstance& p, std::span<const double> alpha) {
  std::vector<double> v = p.matrix.matvec(alpha);
  return objective_a(p, alpha, v);
}

double objective_a(const ProblemInstance& p, std::span<const double> alpha,
                   std::span<const double> v, bool audit) {
  if (audit) {
    std::vector<double> check = p.matrix.matvec(alpha);
    for (std::size_t j = 0; j < check.size(); ++j)
      if (std::abs(check[j] - v[j]) > 1e-8)
        throw contract_error("objective_a: cached v drifted from A alpha");
  }
  double gs = p.separable.value_sum(alpha);
  if (gs == kInf) return kInf;
  return p.smooth.value(v) + gs;
}

double objective_b(const ProblemInstance& p, std::span<const double> w) {
  double s = p.smooth.conjugate(w);
  if (s == kInf) return kInf;
  for (std::size_t i = 0; i < p.matrix.cols(); ++i)
    s += p.separable.conjugate(i, -p.matrix.column_dot(i, w));
  return s;
}

std::vector<double> map_w(const ProblemInstance& p,
                          std::span<const double> v) {
  return p.smooth.gradient(v);
}

GapValue duality_gap(const ProblemInstance& p, std::span<const double> alpha) {
  std::vector<double> v = p.matrix.matvec(alpha);
  return duality_gap(p, alpha, v);
}

GapValue duality_gap(const ProblemInstance& p, std::span<const double> alpha,
                     std::span<const double> v) {
  GapValue out;
  out.objective_a = objective_a(p, alpha, v);
  std::vector<double> w = map_w(p, v);
  out.objective_b = objective_b(p, w);
  out.raw = out.objective_a + out.objective_b;
  if (out.raw < -1e-9)
    throw numerical_error("duality gap " + std::to_string(out.raw) +
                          " below -1e-9: conjugate pair inconsistent");
  out.gap = out.raw < 0 ? 0.0 : out.raw;
  return out;
}

// --------------------------------------------------------------------------
// InputProblem and the variant mapping
// --------------------------------------------------------------------------

InputProblem InputProblem::lasso(double lambda) {
  return {LossKind::squared, lambda, 0.0};
}
InputProblem InputProblem::elastic_net(double lambda, double eta) {
  if (eta < 0 || eta > 1)
    throw std::invalid_argument("elastic_net: eta outside [0,1]");
  return {LossKind::squared, eta * lambda, (1.0 - eta) * lambda};
}
InputProblem InputProblem::ridge(double lambda) {
  return {LossKind::squared, 0.0, lambda};
}
InputProblem InputProblem::svm_hinge(double lambda) {
  return {LossKind::hinge, 0.0, lambda};
}
InputProblem InputProblem::absolute_deviation(double lambda) {
  return {LossKind::absolute, 0.0, lambda};
}
InputProblem InputProblem::logistic_l1(double lambda) {
  return {LossKind::logistic, lambda, 0.0};
}
InputProblem InputProblem::logistic_l2(double lambda) {
  return {LossKind::logistic, 0.0, lambda};
}

InputProblem smoothing_wrap(const InputProblem& p, double delta) {
  if (delta < 0) throw std::invalid_argument("smoothing_wrap: delta < 0");
  if (p.l2_weight != 0)
    throw std::invalid_argument(
        "smoothing_wrap: base regularizer must be pure L1");
  InputProblem out = p;
  out.l2_weight = delta;
  return out;
}

CaseVariant choose_variant(bool loss_smooth, bool loss_separable,
                           bool reg_strongly_convex, bool reg_separable,
                           std::size_t n_features, std::size_t n_examples) {
  if (loss_smooth && reg_strongly_convex) {
    Variant v = n_features > n_examples ? Variant::primal : Variant::dual;
    return {ProblemCase::smooth_strong, v};
  }
  if (loss_smooth) {
    if (!reg_separable)
      throw std::invalid_argument(
          "unsupported objective: non-strongly-convex regularizer must be "
          "separable");
    return {ProblemCase::smooth_nonstrong, Variant::primal};
  }
  if (reg_strongly_convex) {
    if (!loss_separable)
      throw std::invalid_argument(
          "unsupported objective: non-smooth loss must be separable");
    return {ProblemCase::nonsmooth_strong, Variant::dual};
  }
  throw std::invalid_argument(
      "unsupported objective: non-smooth loss with a regularizer that is not "
      "strongly convex");
}

CaseVariant choose_variant(const InputProblem& p, std::size_t n_features,
                           std::size_t n_examples) {
  return choose_variant(p.loss_smooth(), p.loss_separable(),
                        p.reg_strongly_convex(), p.reg_separable(), n_features,
                        n_examples);
}

ProblemInstance build_instance(const InputProblem& input, const Dataset& data,
                               Variant variant, const BuildOptions& opts) {
  if (input.l1_weight < 0 || input.l2_weight < 0)
    throw std::invalid_argument("build_instance: negative penalty weight");
  if (input.l1_weight == 0 && input.l2_weight == 0)
    throw std::invalid_argument("build_instance: no regularizer");

  ProblemInstance inst;
  inst.problem_case = choose_variant(input, data.n_features(),
                                     data.n_examples())
                          .problem_case;
  inst.variant = variant;

  if (variant == Variant::primal) {
    if (!input.loss_smooth())
      throw std::invalid_argument(
          "build_instance: the primal variant needs a smooth loss");
    Dataset d = reorient(data, Orientation::features_as_columns);
    switch (input.loss) {
      case LossKind::squared:
        inst.smooth = SmoothTerm::least_squares(d.labels);
        break;
      case LossKind::logistic:
        inst.smooth = SmoothTerm::logistic(d.labels);
        break;
      default:
        throw std::invalid_argument("build_instance: unexpected loss");
    }
    std::size_t n = d.matrix.cols();
    if (input.l2_weight > 0) {
      inst.separable =
          SeparableTerm::l1l2_weights(input.l1_weight, input.l2_weight, n);
    } else {
      double bound = opts.bound_override
                         ? *opts.bound_override
                         : inst.smooth.value_at_zero() / input.l1_weight;
      inst.separable = SeparableTerm::l1_bounded(input.l1_weight, bound, n);
    }
    inst.matrix = std::move(d.matrix);
  } else {
    if (input.l2_weight <= 0)
      throw std::invalid_argument(
          "build_instance: the dual variant needs a strongly convex "
          "regularizer (use smoothing_wrap for pure L1)");
    Dataset d = reorient(data, Orientation::samples_as_columns);
    std::size_t n = d.matrix.cols();  // examples
    inst.smooth = SmoothTerm::l1l2_conjugate(input.l1_weight, input.l2_weight,
                                             d.matrix.rows());
    switch (input.loss) {
      case LossKind::squared:
        inst.separable = SeparableTerm::least_squares_dual(d.labels);
        break;
      case LossKind::hinge:
        inst.separable = SeparableTerm::hinge_dual(d.labels, n);
        break;
      case LossKind::absolute:
        inst.separable = SeparableTerm::absdev_dual(d.labels, n);
        break;
      case LossKind::logistic:
        inst.separable = SeparableTerm::logistic_dual(d.labels, n);
        break;
    }
    inst.matrix = std::move(d.matrix);
  }
  inst.validate();
  return inst;
}

double input_objective(const InputProblem& input, const Dataset& data,
                       std::span<const double> model) {
  if (model.size() != data.n_features())
    throw contract_error("input_objective: model length != feature count");
  std::size_t m = data.n_examples();
  std::vector<double> scores(m);
  if (data.orientation == Orientation::samples_as_columns) {
    for (std::size_t i = 0; i < m; ++i)
      scores[i] = data.matrix.column_dot(i, model);
  } else {
    scores = data.matrix.matvec(model);
  }
  double loss = 0;
  switch (input.loss) {
    case LossKind::squared:
      for (std::size_t i = 0; i < m; ++i) {
        double r = scores[i] - data.labels[i];
        loss += 0.5 * r * r;
      }
      break;
    case LossKind::logistic:
      for (std::size_t i = 0; i < m; ++i)
        loss += log1p_exp_neg(data.labels[i] * scores[i]);
      break;
    case LossKind::hinge:
      for (std::size_t i = 0; i < m; ++i)
        loss += std::max(0.0, 1.0 - data.labels[i] * scores[i]);
      loss /= static_cast<double>(m);
      break;
    case LossKind::absolute:
      for (std::size_t i = 0; i < m; ++i)
        loss += std::abs(scores[i] - data.labels[i]);
      loss /= static_cast<double>(m);
      break;
  }
  double pen = 0;
  for (double u : model)
    pen += input.l1_weight * std::abs(u) + 0.5 * input.l2_weight * u * u;
  return loss + pen;
}

}  // namespace dcopt
