#include <doctest.h>
#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "dcopt/error.hpp"
#include "dcopt/libsvm.hpp"

using namespace dcopt;

TEST_SUITE_BEGIN("libsvm");

static const char* sample_text =
    "+1 1:0.5 3:-1.25\n"
    "-1 2:2.0\n"
    "0.75 1:1 2:1 3:1\n";

TEST_CASE("parses text with samples as columns") {
  Dataset d = parse_libsvm(sample_text, Orientation::samples_as_columns);
  CHECK(d.n_examples() == 3);
  CHECK(d.n_features() == 3);
  REQUIRE(d.labels.size() == 3);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);
  CHECK(d.labels[2] == 0.75);
  // indices are 1-based in the text, 0-based in the matrix
  REQUIRE(d.matrix.column(0).size() == 2);
  CHECK(d.matrix.column(0)[0].row == 0);
  CHECK(d.matrix.column(0)[0].value == 0.5);
  CHECK(d.matrix.column(0)[1].row == 2);
  CHECK(d.matrix.column(0)[1].value == -1.25);
  CHECK(d.matrix.column(1)[0].row == 1);
  d.validate();
}

TEST_CASE("features as columns transposes the layout") {
  Dataset d = parse_libsvm(sample_text, Orientation::features_as_columns);
  CHECK(d.n_examples() == 3);
  CHECK(d.n_features() == 3);
  CHECK(d.matrix.cols() == 3);   // one column per feature
  CHECK(d.matrix.rows() == 3);   // one row per example
  // feature 2 appears in examples 2 and 3
  REQUIRE(d.matrix.column(1).size() == 2);
  CHECK(d.matrix.column(1)[0].row == 1);
  CHECK(d.matrix.column(1)[0].value == 2.0);
  CHECK(d.matrix.column(1)[1].row == 2);
  CHECK(d.matrix.column(1)[1].value == 1.0);
}

TEST_CASE("dim_override pads the feature dimension") {
  Dataset d = parse_libsvm("1 1:1\n", Orientation::samples_as_columns, 7);
  CHECK(d.n_features() == 7);
}

TEST_CASE("errors carry the line number") {
  SUBCASE("bad label") {
    CHECK_THROWS_WITH_AS(parse_libsvm("1 1:1\nnope 1:1\n",
                                      Orientation::samples_as_columns),
                         doctest::Contains("line 2"), parse_error);
  }
  SUBCASE("non-increasing indices") {
    CHECK_THROWS_WITH_AS(parse_libsvm("1 2:1 2:3\n",
                                      Orientation::samples_as_columns),
                         doctest::Contains("line 1"), parse_error);
  }
  SUBCASE("zero index") {
    CHECK_THROWS_AS(parse_libsvm("1 0:1\n", Orientation::samples_as_columns),
                    parse_error);
  }
  SUBCASE("missing colon") {
    CHECK_THROWS_AS(parse_libsvm("1 11\n", Orientation::samples_as_columns),
                    parse_error);
  }
  SUBCASE("index above override") {
    CHECK_THROWS_AS(
        parse_libsvm("1 9:1\n", Orientation::samples_as_columns, 4),
        parse_error);
  }
}

TEST_CASE("blank lines and comments-free round trip") {
  Dataset d =
      parse_libsvm("1 1:1\n\n2 2:1\n", Orientation::samples_as_columns);
  CHECK(d.n_examples() == 2);
}

TEST_CASE("file loader handles plain and gzip files") {
  std::string plain = "/tmp/dcopt_test_data.txt";
  {
    std::ofstream out(plain);
    out << sample_text;
  }
  Dataset d = load_libsvm_file(plain, Orientation::samples_as_columns);
  CHECK(d.n_examples() == 3);
  CHECK(d.source == plain);

  std::string gz = "/tmp/dcopt_test_data.txt.gz";
  gzFile f = gzopen(gz.c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, sample_text, (unsigned)std::string(sample_text).size());
  gzclose(f);
  Dataset dz = load_libsvm_file(gz, Orientation::samples_as_columns);
  CHECK(dz.n_examples() == 3);
  CHECK(dz.n_features() == 3);
  CHECK(dz.labels == d.labels);

  CHECK_THROWS_AS(load_libsvm_file("/tmp/definitely_missing_file.txt",
                                   Orientation::samples_as_columns),
                  parse_error);
  std::remove(plain.c_str());
  std::remove(gz.c_str());
}

TEST_CASE("reorient is an involution that preserves entries") {
  Dataset d = parse_libsvm(sample_text, Orientation::samples_as_columns);
  Dataset t = reorient(d, Orientation::features_as_columns);
  CHECK(t.orientation == Orientation::features_as_columns);
  CHECK(t.n_examples() == d.n_examples());
  CHECK(t.n_features() == d.n_features());
  CHECK(t.labels == d.labels);
  Dataset back = reorient(t, Orientation::samples_as_columns);
  for (std::size_t j = 0; j < d.matrix.cols(); ++j) {
    REQUIRE(back.matrix.column(j).size() == d.matrix.column(j).size());
    for (std::size_t e = 0; e < d.matrix.column(j).size(); ++e) {
      CHECK(back.matrix.column(j)[e].row == d.matrix.column(j)[e].row);
      CHECK(back.matrix.column(j)[e].value == d.matrix.column(j)[e].value);
    }
  }
  // reorient to the current orientation is a plain copy
  Dataset same = reorient(d, Orientation::samples_as_columns);
  CHECK(same.matrix.cols() == d.matrix.cols());
}

TEST_CASE("validate checks label count") {
  Dataset d = parse_libsvm(sample_text, Orientation::samples_as_columns);
  d.labels.pop_back();
  CHECK_THROWS_AS(d.validate(), contract_error);
}

TEST_SUITE_END();
