#include "dcopt/libsvm.hpp"

#include <zlib.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "dcopt/error.hpp"

namespace dcopt {

void Dataset::validate() const {
  matrix.validate();
  if (labels.size() != n_examples())
    throw contract_error("dataset: label count does not match example count");
}

namespace {

struct Example {
  double label;
  SparseColumn entries;  // 0-based feature index in `row`
};

bool parse_double(std::string_view s, double& out) {
  // from_chars rejects an explicit plus, but '+1' labels are standard
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
    if (s.empty() || s.front() == '+' || s.front() == '-') return false;
  }
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_u32(std::string_view s, std::uint32_t& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::vector<Example> parse_lines(std::istream& in, std::size_t& max_index) {
  std::vector<Example> examples;
  max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;  // blank line

    std::istringstream fields(line);
    std::string tok;
    fields >> tok;
    Example ex;
    if (!parse_double(tok, ex.label))
      throw parse_error("malformed label '" + tok + "'", lineno);

    std::uint32_t prev_index = 0;
    while (fields >> tok) {
      std::size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw parse_error("malformed feature token '" + tok + "'", lineno);
      std::uint32_t index;
      double value;
      if (!parse_u32(std::string_view(tok).substr(0, colon), index) ||
          index == 0)
        throw parse_error("malformed feature index in '" + tok + "'", lineno);
      if (!parse_double(std::string_view(tok).substr(colon + 1), value))
        throw parse_error("malformed feature value in '" + tok + "'", lineno);
      if (index <= prev_index)
        throw parse_error("feature indices not increasing at '" + tok + "'",
                          lineno);
      prev_index = index;
      if (index > max_index) max_index = index;
      if (value != 0.0) ex.entries.push_back({index - 1, value});
    }
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw parse_error("no examples in input");
  return examples;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, Orientation orientation,
                     std::size_t dim_override) {
  std::size_t max_index = 0;
  std::vector<Example> examples = parse_lines(in, max_index);

  std::size_t dim = max_index;
  if (dim_override) {
    if (max_index > dim_override)
      throw parse_error("feature index " + std::to_string(max_index) +
                        " exceeds declared dimension " +
                        std::to_string(dim_override));
    dim = dim_override;
  }
  if (dim == 0) throw parse_error("no features in input");

  Dataset d;
  d.orientation = orientation;
  d.labels.reserve(examples.size());
  for (const auto& ex : examples) d.labels.push_back(ex.label);

  if (orientation == Orientation::samples_as_columns) {
    std::vector<SparseColumn> cols;
    cols.reserve(examples.size());
    for (auto& ex : examples) cols.push_back(std::move(ex.entries));
    d.matrix = ColumnMatrix(dim, std::move(cols));
  } else {
    std::vector<SparseColumn> cols(dim);
    for (std::size_t s = 0; s < examples.size(); ++s)
      for (const auto& e : examples[s].entries)
        cols[e.row].push_back({static_cast<std::uint32_t>(s), e.value});
    d.matrix = ColumnMatrix(examples.size(), std::move(cols));
  }
  d.validate();
  return d;
}

Dataset parse_libsvm(const std::string& text, Orientation orientation,
                     std::size_t dim_override) {
  std::istringstream in(text);
  return parse_libsvm(in, orientation, dim_override);
}

namespace {

std::string read_gz_file(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw parse_error("cannot open '" + path + "'");
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, n);
  bool ok = n == 0;
  gzclose(f);
  if (!ok) throw parse_error("gzip read failed for '" + path + "'");
  return out;
}

}  // namespace

Dataset load_libsvm_file(const std::string& path, Orientation orientation,
                         std::size_t dim_override) {
  Dataset d;
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    d = parse_libsvm(read_gz_file(path), orientation, dim_override);
  } else {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    d = parse_libsvm(in, orientation, dim_override);
  }
  d.source = path;
  return d;
}

Dataset reorient(const Dataset& d, Orientation wanted) {
  if (d.orientation == wanted) return d;
  Dataset out;
  out.matrix = d.matrix.transposed();
  out.labels = d.labels;
  out.orientation = wanted;
  out.source = d.source;
  out.normalized = d.normalized;
  // scale factors apply to the old columns; they do not transfer to the
  // transposed layout
  out.validate();
  return out;
}

}  // namespace dcopt
