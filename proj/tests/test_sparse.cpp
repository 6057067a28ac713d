#include <doctest.h>

#include <random>
#include <set>

#include "dcopt/error.hpp"
#include "dcopt/sparse.hpp"
#include "oracles.hpp"

using namespace dcopt;

TEST_SUITE_BEGIN("sparse");

TEST_CASE("matvec against the dense oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t rows = 1 + rng() % 12, cols = 1 + rng() % 12;
    ColumnMatrix m = oracle::random_matrix(rows, cols, rng);
    Eigen::MatrixXd a = oracle::to_dense(m);
    std::vector<double> x = oracle::random_vector(cols, rng);
    std::vector<double> y = oracle::random_vector(rows, rng);

    Eigen::VectorXd ax = a * oracle::to_eigen(x);
    std::vector<double> got = m.matvec(x);
    REQUIRE(got.size() == rows);
    for (std::size_t r = 0; r < rows; ++r)
      CHECK(got[r] == doctest::Approx(ax[(Eigen::Index)r]).epsilon(1e-12));

    Eigen::VectorXd aty = a.transpose() * oracle::to_eigen(y);
    std::vector<double> got_t = m.transpose_matvec(y);
    REQUIRE(got_t.size() == cols);
    for (std::size_t c = 0; c < cols; ++c)
      CHECK(got_t[c] == doctest::Approx(aty[(Eigen::Index)c]).epsilon(1e-12));
  }
}

TEST_CASE("column accessors") {
  ColumnMatrix m(3, {{{0, 1.0}, {2, -2.0}}, {{1, 3.0}}});
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m.nonzeros() == 3);
  CHECK(m.column_sqnorm(0) == doctest::Approx(5.0));
  CHECK(m.column_norm(1) == doctest::Approx(3.0));

  std::vector<double> out(3, 1.0);
  m.add_scaled_column(0, 2.0, out);
  CHECK(out[0] == doctest::Approx(3.0));
  CHECK(out[1] == doctest::Approx(1.0));
  CHECK(out[2] == doctest::Approx(-3.0));

  std::vector<double> x{1.0, 2.0, 3.0};
  CHECK(m.column_dot(0, x) == doctest::Approx(1.0 - 6.0));
  CHECK(m.column_dot(1, x) == doctest::Approx(6.0));
}

TEST_CASE("identity") {
  ColumnMatrix eye = ColumnMatrix::identity(4);
  std::vector<double> x{1, 2, 3, 4};
  auto y = eye.matvec(x);
  for (int i = 0; i < 4; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("transpose round-trips") {
  std::mt19937_64 rng(11);
  ColumnMatrix m = oracle::random_matrix(6, 9, rng, 0.4);
  ColumnMatrix back = m.transposed().transposed();
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    REQUIRE(back.column(j).size() == m.column(j).size());
    for (std::size_t t = 0; t < m.column(j).size(); ++t) {
      CHECK(back.column(j)[t].row == m.column(j)[t].row);
      CHECK(back.column(j)[t].value == m.column(j)[t].value);
    }
  }
}

TEST_CASE("select_columns keeps data in index order") {
  std::mt19937_64 rng(3);
  ColumnMatrix m = oracle::random_matrix(5, 8, rng);
  std::vector<std::uint32_t> idx{1, 4, 7};
  ColumnMatrix sub = m.select_columns(idx);
  REQUIRE(sub.cols() == 3);
  CHECK(sub.rows() == 5);
  for (std::size_t t = 0; t < idx.size(); ++t)
    CHECK(sub.column_sqnorm(t) == doctest::Approx(m.column_sqnorm(idx[t])));
}

TEST_CASE("normalize_columns caps norms at one") {
  ColumnMatrix m(2, {{{0, 3.0}, {1, 4.0}}, {{0, 0.5}}});
  auto factors = m.normalize_columns();
  REQUIRE(factors.size() == 2);
  CHECK(factors[0] == doctest::Approx(5.0));
  CHECK(factors[1] == doctest::Approx(1.0));  // short columns untouched
  CHECK(m.column_norm(0) == doctest::Approx(1.0));
  CHECK(m.column_norm(1) == doctest::Approx(0.5));
}

TEST_CASE("broken columns are rejected at construction") {
  using Cols = std::vector<SparseColumn>;
  SUBCASE("unsorted rows") {
    CHECK_THROWS_AS(ColumnMatrix(3, Cols{{{2, 1.0}, {0, 1.0}}}),
                    contract_error);
  }
  SUBCASE("duplicate rows") {
    CHECK_THROWS_AS(ColumnMatrix(3, Cols{{{1, 1.0}, {1, 2.0}}}),
                    contract_error);
  }
  SUBCASE("row out of range") {
    CHECK_THROWS_AS(ColumnMatrix(3, Cols{{{3, 1.0}}}), contract_error);
  }
  SUBCASE("explicit zero") {
    CHECK_THROWS_AS(ColumnMatrix(3, Cols{{{1, 0.0}}}), contract_error);
  }
  SUBCASE("clean matrix passes") {
    ColumnMatrix m(3, {{{0, 1.0}, {2, -1.0}}, {}});
    CHECK_NOTHROW(m.validate());
  }
}

TEST_CASE("balanced partition") {
  SUBCASE("five columns over two blocks split 3/2") {
    Partition p = Partition::balanced(5, 2, 1);
    REQUIRE(p.k_blocks == 2);
    std::multiset<std::size_t> sizes{p.block_size(0), p.block_size(1)};
    CHECK(sizes == std::multiset<std::size_t>{2, 3});
    p.validate(5);
  }
  SUBCASE("sizes differ by at most one") {
    for (std::uint32_t k : {1u, 3u, 7u}) {
      Partition p = Partition::balanced(23, k, 42);
      std::size_t lo = 23, hi = 0;
      for (std::uint32_t b = 0; b < k; ++b) {
        lo = std::min(lo, p.block_size(b));
        hi = std::max(hi, p.block_size(b));
      }
      CHECK(hi - lo <= 1);
      p.validate(23);
    }
  }
  SUBCASE("deterministic per seed, different across seeds") {
    Partition a = Partition::balanced(40, 4, 9);
    Partition b = Partition::balanced(40, 4, 9);
    Partition c = Partition::balanced(40, 4, 10);
    CHECK(a.assignment == b.assignment);
    CHECK(a.assignment != c.assignment);
  }
  SUBCASE("blocks are sorted and cover everything") {
    Partition p = Partition::balanced(17, 4, 5);
    std::set<std::uint32_t> seen;
    for (const auto& blk : p.blocks) {
      CHECK(std::is_sorted(blk.begin(), blk.end()));
      for (auto c : blk) seen.insert(c);
    }
    CHECK(seen.size() == 17);
  }
}

TEST_CASE("from_assignment and validation") {
  Partition p = Partition::from_assignment({0, 1, 0, 1, 1}, 2);
  CHECK(p.blocks[0] == std::vector<std::uint32_t>{0, 2});
  CHECK(p.blocks[1] == std::vector<std::uint32_t>{1, 3, 4});
  p.validate(5);
  CHECK_THROWS_AS(Partition::from_assignment({0, 2}, 2),
                  std::invalid_argument);
}

TEST_CASE("block_matvec requires support inside the block") {
  std::mt19937_64 rng(5);
  ColumnMatrix m = oracle::random_matrix(4, 6, rng);
  Partition p = Partition::balanced(6, 2, 1);

  std::vector<double> alpha(6, 0.0);
  for (auto c : p.blocks[0]) alpha[c] = 1.0;

  auto v = block_matvec(m, p, 0, alpha);
  Eigen::VectorXd want =
      oracle::to_dense(m) * oracle::to_eigen(alpha);
  for (std::size_t r = 0; r < 4; ++r)
    CHECK(v[r] == doctest::Approx(want[(Eigen::Index)r]));

  alpha[p.blocks[1][0]] = 0.5;  // support leaks outside block 0
  CHECK_THROWS_AS(block_matvec(m, p, 0, alpha), contract_error);
}

TEST_SUITE_END();
