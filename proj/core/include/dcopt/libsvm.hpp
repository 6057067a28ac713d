#pragma once

#include <istream>
#include <string>
#include <vector>

#include "dcopt/sparse.hpp"

namespace dcopt {

// samples_as_columns: one training example per column (sample-partitioned
// runs). features_as_columns: one feature per column (feature-partitioned
// runs).
enum class Orientation { samples_as_columns, features_as_columns };

struct Dataset {
  ColumnMatrix matrix;
  std::vector<double> labels;  // one per training example
  Orientation orientation = Orientation::features_as_columns;
  std::string source;
  bool normalized = false;
  std::vector<double> scale_factors;  // column scale applied by normalization

  std::size_t n_examples() const {
    return orientation == Orientation::samples_as_columns ? matrix.cols()
                                                          : matrix.rows();
  }
  std::size_t n_features() const {
    return orientation == Orientation::samples_as_columns ? matrix.rows()
                                                          : matrix.cols();
  }
  void validate() const;
};

// Text format: one example per line, "label index:value ...", indices 1-based
// and strictly increasing within a line. The feature dimension is the largest
// index seen unless dim_override is nonzero. Throws parse_error with the
// offending line number.
Dataset parse_libsvm(std::istream& in, Orientation orientation,
                     std::size_t dim_override = 0);
Dataset parse_libsvm(const std::string& text, Orientation orientation,
                     std::size_t dim_override = 0);

// File loader; paths ending in ".gz" are decompressed on the fly.
Dataset load_libsvm_file(const std::string& path, Orientation orientation,
                         std::size_t dim_override = 0);

// Re-orients a dataset by transposing the matrix (labels are untouched; their
// length stays the number of examples).
Dataset reorient(const Dataset& d, Orientation wanted);

}  // namespace dcopt
