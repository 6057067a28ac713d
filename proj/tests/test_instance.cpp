#include <doctest.h>

#include <cmath>
#include <random>

#include "dcopt/error.hpp"
#include "dcopt/libsvm.hpp"
#include "dcopt/problem.hpp"
#include "oracles.hpp"

using namespace dcopt;

TEST_SUITE_BEGIN("instance");

namespace {

Dataset tiny_identity_dataset() {
  // two examples, two features, X = I, labels (1, 1)
  Dataset d;
  d.matrix = ColumnMatrix::identity(2);
  d.labels = {1.0, 1.0};
  d.orientation = Orientation::features_as_columns;
  d.source = "tiny";
  return d;
}

Dataset random_dataset(std::size_t rows, std::size_t cols,
                       std::uint64_t seed, bool classification = false) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.matrix = oracle::random_matrix(rows, cols, rng, 0.5);
  d.labels = oracle::random_vector(rows, rng);
  if (classification)
    for (auto& y : d.labels) y = y >= 0 ? 1.0 : -1.0;
  d.orientation = Orientation::features_as_columns;
  d.source = "random";
  return d;
}

}  // namespace

TEST_CASE("variant choice covers the case table") {
  // smooth loss, strongly convex regularizer: both variants admissible,
  // pick by shape (primal iff more features than examples; tie goes dual)
  auto cv = choose_variant(true, true, true, true, 10, 5);
  CHECK(cv.problem_case == ProblemCase::smooth_strong);
  CHECK(cv.variant == Variant::primal);
  cv = choose_variant(true, true, true, true, 5, 10);
  CHECK(cv.variant == Variant::dual);
  cv = choose_variant(true, true, true, true, 7, 7);
  CHECK(cv.variant == Variant::dual);

  cv = choose_variant(true, true, false, true, 5, 10);
  CHECK(cv.problem_case == ProblemCase::smooth_nonstrong);
  CHECK(cv.variant == Variant::primal);

  cv = choose_variant(false, true, true, true, 10, 5);
  CHECK(cv.problem_case == ProblemCase::nonsmooth_strong);
  CHECK(cv.variant == Variant::dual);

  CHECK_THROWS_AS(choose_variant(false, true, false, true, 5, 5),
                  std::invalid_argument);
}

TEST_CASE("variant choice from an input problem") {
  CHECK(choose_variant(InputProblem::lasso(0.1), 20, 10).variant ==
        Variant::primal);
  CHECK(choose_variant(InputProblem::ridge(0.1), 10, 20).variant ==
        Variant::dual);
  CHECK(choose_variant(InputProblem::svm_hinge(0.1), 20, 10).variant ==
        Variant::dual);
  CHECK_THROWS_AS(choose_variant(InputProblem::svm_hinge(0.0), 5, 5),
                  std::invalid_argument);
}

TEST_CASE("smoothing_wrap adds curvature to a pure-L1 problem") {
  InputProblem lasso = InputProblem::lasso(0.25);
  // pure L1 is stuck on the primal route; the wrap opens the dual one
  CHECK(choose_variant(lasso, 5, 10).problem_case ==
        ProblemCase::smooth_nonstrong);
  CHECK(choose_variant(lasso, 5, 10).variant == Variant::primal);
  InputProblem wrapped = smoothing_wrap(lasso, 1e-3);
  CHECK(wrapped.l1_weight == 0.25);
  CHECK(wrapped.l2_weight == 1e-3);
  CHECK(choose_variant(wrapped, 5, 10).variant == Variant::dual);
  CHECK_THROWS_AS(smoothing_wrap(InputProblem::ridge(0.1), 1e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(smoothing_wrap(lasso, -1.0), std::invalid_argument);
}

TEST_CASE("primal lasso instance on the identity design") {
  Dataset d = tiny_identity_dataset();
  InputProblem input = InputProblem::lasso(0.1);
  ProblemInstance p = build_instance(input, d, Variant::primal);

  CHECK(p.variant == Variant::primal);
  CHECK(p.smooth.kind() == SmoothKind::least_squares);
  CHECK(p.separable.kind() == SeparableKind::l1_bounded);
  // default box radius is f(0) / lambda = 1.0 / 0.1
  CHECK(p.separable.bound() == doctest::Approx(10.0));
  CHECK(p.dim_shared() == 2);
  CHECK(p.dim_partitioned() == 2);

  SUBCASE("objective at zero is f(0) = 1.0") {
    std::vector<double> zero{0.0, 0.0};
    CHECK(objective_a(p, zero) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("dual objective at w = (-0.1, -0.1) is -0.19") {
    std::vector<double> w{-0.1, -0.1};
    CHECK(objective_b(p, w) == doctest::Approx(-0.19).epsilon(1e-12));
  }
  SUBCASE("the soft-threshold point certifies a zero gap") {
    std::vector<double> alpha{0.9, 0.9};
    GapValue g = duality_gap(p, alpha);
    CHECK(g.objective_a == doctest::Approx(0.19).epsilon(1e-12));
    CHECK(g.objective_b == doctest::Approx(-0.19).epsilon(1e-12));
    CHECK(g.gap <= 1e-12);
    CHECK(g.raw >= -1e-9);
  }
  SUBCASE("bound_override replaces the default radius") {
    BuildOptions opts;
    opts.bound_override = 3.5;
    ProblemInstance q = build_instance(input, d, Variant::primal, opts);
    CHECK(q.separable.bound() == 3.5);
  }
}

TEST_CASE("gap clamps tiny negative values and rejects real ones") {
  Dataset d = tiny_identity_dataset();
  ProblemInstance p =
      build_instance(InputProblem::lasso(0.1), d, Variant::primal);

  SUBCASE("slightly inconsistent v stays within the clamp") {
    std::vector<double> alpha{0.9 - 3e-9, 0.9 - 3e-9};
    std::vector<double> v{0.9, 0.9};
    GapValue g = duality_gap(p, alpha, v);
    // raw = -2 * 0.1 * 3e-9 = -6e-10: negative but above the floor
    CHECK(g.raw < 0);
    CHECK(g.raw >= -1e-9);
    CHECK(g.gap == 0.0);
  }
  SUBCASE("a real inconsistency throws") {
    std::vector<double> alpha{0.9 - 1e-4, 0.9 - 1e-4};
    std::vector<double> v{0.9, 0.9};
    CHECK_THROWS_AS(duality_gap(p, alpha, v), numerical_error);
  }
  SUBCASE("the audit flag catches drifted v") {
    std::vector<double> alpha{0.9 - 1e-4, 0.9 - 1e-4};
    std::vector<double> v{0.9, 0.9};
    CHECK_THROWS_AS(objective_a(p, alpha, v, true), contract_error);
  }
}

TEST_CASE("dual instances require curvature and flip the orientation") {
  Dataset d = random_dataset(8, 5, 3);
  CHECK_THROWS_WITH_AS(
      build_instance(InputProblem::lasso(0.1), d, Variant::dual),
      doctest::Contains("smoothing_wrap"), std::invalid_argument);

  ProblemInstance p =
      build_instance(InputProblem::ridge(0.2), d, Variant::dual);
  CHECK(p.smooth.kind() == SmoothKind::l1l2_conjugate);
  CHECK(p.separable.kind() == SeparableKind::ls_dual);
  CHECK(p.dim_partitioned() == 8);  // columns are examples now
  CHECK(p.dim_shared() == 5);
  CHECK(p.smooth.tau() == doctest::Approx(0.2));

  Dataset dc = random_dataset(8, 5, 4, true);
  ProblemInstance hinge =
      build_instance(InputProblem::svm_hinge(0.2), dc, Variant::dual);
  CHECK(hinge.separable.kind() == SeparableKind::hinge_dual);
  CHECK(hinge.separable.inv_n() == doctest::Approx(1.0 / 8));
  ProblemInstance logi =
      build_instance(InputProblem::logistic_l2(0.2), dc, Variant::dual);
  CHECK(logi.separable.kind() == SeparableKind::logistic_dual);
  ProblemInstance abs =
      build_instance(InputProblem::absolute_deviation(0.2), d, Variant::dual);
  CHECK(abs.separable.kind() == SeparableKind::absdev_dual);

  CHECK_THROWS_AS(build_instance(InputProblem::svm_hinge(0.2), dc,
                                 Variant::primal),
                  std::invalid_argument);
}

TEST_CASE("primal and dual certify the same optimal value on ridge") {
  // strongly convex on both sides, so both variants may run; their optimal
  // objective values must agree: min O_A(primal) == -min... both equal the
  // user objective at the optimum. Solve both by brute dense algebra.
  Dataset d = random_dataset(6, 4, 9);
  double lambda = 0.4;
  InputProblem input = InputProblem::ridge(lambda);

  // closed form ridge: u* = (X^T X + lambda I)^{-1} X^T y
  Eigen::MatrixXd x = oracle::to_dense(d.matrix);
  Eigen::VectorXd y = oracle::to_eigen(d.labels);
  Eigen::MatrixXd gram = x.transpose() * x +
                         lambda * Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd ustar = gram.ldlt().solve(x.transpose() * y);
  double best = input_objective(input, d, oracle::from_eigen(ustar));

  ProblemInstance primal = build_instance(input, d, Variant::primal);
  GapValue gp = duality_gap(primal, oracle::from_eigen(ustar));
  CHECK(gp.objective_a == doctest::Approx(best).epsilon(1e-10));
  CHECK(gp.gap <= 1e-9);

  // under the dual mapping O_B(w) IS the user objective of the model w, so
  // it can never undercut the true optimum; and at w = u* it attains it
  ProblemInstance dual = build_instance(input, d, Variant::dual);
  std::vector<double> alpha0(dual.dim_partitioned(), 0.0);
  GapValue gd = duality_gap(dual, alpha0);
  CHECK(gd.objective_b >= best - 1e-9);
  CHECK(objective_b(dual, oracle::from_eigen(ustar)) ==
        doctest::Approx(best).epsilon(1e-10));
}

TEST_CASE("input_objective matches O_A under the primal mapping") {
  std::mt19937_64 rng(21);
  Dataset d = random_dataset(7, 9, 5);
  for (auto input : {InputProblem::lasso(0.3),
                     InputProblem::elastic_net(0.3, 0.5)}) {
    ProblemInstance p = build_instance(input, d, Variant::primal);
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> u = oracle::random_vector(9, rng, 0.5);
      CHECK(objective_a(p, u) ==
            doctest::Approx(input_objective(input, d, u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("input_objective averages the non-smooth losses") {
  Dataset d;
  d.matrix = ColumnMatrix::identity(2);
  d.labels = {1.0, -1.0};
  d.orientation = Orientation::features_as_columns;
  std::vector<double> zero{0.0, 0.0};
  // hinge: mean of max(0, 1 - y * 0) = 1
  CHECK(input_objective(InputProblem::svm_hinge(0.5), d, zero) ==
        doctest::Approx(1.0));
  // absolute: mean |0 - y| = 1
  CHECK(input_objective(InputProblem::absolute_deviation(0.5), d, zero) ==
        doctest::Approx(1.0));
  // squared keeps the plain sum
  CHECK(input_objective(InputProblem::lasso(0.5), d, zero) ==
        doctest::Approx(1.0));
}

TEST_CASE("build_instance validates the penalty") {
  Dataset d = tiny_identity_dataset();
  InputProblem none{LossKind::squared, 0.0, 0.0};
  CHECK_THROWS_AS(build_instance(none, d, Variant::primal),
                  std::invalid_argument);
  InputProblem neg{LossKind::squared, -1.0, 0.0};
  CHECK_THROWS_AS(build_instance(neg, d, Variant::primal),
                  std::invalid_argument);
}

TEST_CASE("instance validate enforces case-variant compatibility") {
  Dataset d = random_dataset(8, 5, 3, true);
  ProblemInstance p =
      build_instance(InputProblem::svm_hinge(0.2), d, Variant::dual);
  p.variant = Variant::primal;  // hinge must run dual
  CHECK_THROWS_AS(p.validate(), contract_error);
}

TEST_SUITE_END();
