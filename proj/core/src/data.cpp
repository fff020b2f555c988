#include "nldd/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nldd/random.hpp"

namespace nldd {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits on '\n', dropping a trailing '\r'. Line numbers are 1-based.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view s, Index& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> default_names(std::string_view prefix, Index n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (Index i = 0; i < n; ++i) names.push_back(std::string(prefix) + std::to_string(i + 1));
  return names;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1) throw DataError("dataset has no rows");
  if (features.rows() != labels.rows()) throw DataError("feature and label row counts differ");
  if (features.cols() < 1) throw DataError("no feature columns");
  if (labels.cols() < 1) throw DataError("no label columns");
  if (feature_names.size() != feature_count()) throw DataError("feature name count does not match d");
  if (label_names.size() != label_count()) throw DataError("label name count does not match L");
  for (Index i = 0; i < static_cast<Index>(labels.size()); ++i)
    if (labels.data()[i] > 1) throw DataError("label entry outside {0,1}");
}

Dataset Dataset::subset(std::span<const Index> indices) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.resize(static_cast<Eigen::Index>(indices.size()), labels.cols());
  for (Index r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows()) throw std::out_of_range("subset index out of range");
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(indices[r]));
    out.labels.row(static_cast<Eigen::Index>(r)) = labels.row(static_cast<Eigen::Index>(indices[r]));
  }
  out.feature_names = feature_names;
  out.label_names = label_names;
  return out;
}

Dataset make_dataset(Matrix features, LabelMatrix labels) {
  Dataset d;
  d.feature_names = default_names("x", static_cast<Index>(features.cols()));
  d.label_names = default_names("y", static_cast<Index>(labels.cols()));
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.validate();
  return d;
}

Dataset parse_csv(std::string_view text, Index label_count) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError("empty file: header row missing");

  std::vector<std::string> header;
  for (auto cell : split_on(lines[0], ',')) header.emplace_back(trim(cell));
  const Index columns = header.size();
  if (label_count == 0) throw DataError("label count must be at least 1");
  if (label_count >= columns) throw DataError("line 1: no feature columns (label count " + std::to_string(label_count) +
                                              " >= " + std::to_string(columns) + " columns)");
  const Index d = columns - label_count;

  std::vector<std::string_view> body;
  std::vector<std::size_t> line_numbers;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    body.push_back(lines[i]);
    line_numbers.push_back(i + 1);
  }
  if (body.empty()) throw DataError("no data rows");

  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(body.size()), static_cast<Eigen::Index>(d));
  data.labels.resize(static_cast<Eigen::Index>(body.size()), static_cast<Eigen::Index>(label_count));
  for (std::size_t r = 0; r < body.size(); ++r) {
    const auto line = line_numbers[r];
    const auto cells = split_on(body[r], ',');
    if (cells.size() != columns)
      fail_at(line, "expected " + std::to_string(columns) + " columns, found " + std::to_string(cells.size()));
    for (Index c = 0; c < d; ++c) {
      double v;
      if (!parse_double(cells[c], v))
        fail_at(line, "non-numeric feature value '" + std::string(trim(cells[c])) + "' in column " + header[c]);
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    for (Index c = 0; c < label_count; ++c) {
      const auto cell = trim(cells[d + c]);
      if (cell != "0" && cell != "1")
        fail_at(line, "label value '" + std::string(cell) + "' in column " + header[d + c] + " is not 0 or 1");
      data.labels(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cell == "1" ? 1 : 0;
    }
  }
  data.feature_names.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(d));
  data.label_names.assign(header.begin() + static_cast<std::ptrdiff_t>(d), header.end());
  data.validate();
  return data;
}

Dataset load_csv(const std::filesystem::path& path, Index label_count) {
  try {
    return parse_csv(read_file(path), label_count);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Matrix parse_csv_features(std::string_view text, Index feature_count, Index label_count) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError("empty file: header row missing");
  const Index columns = split_on(lines[0], ',').size();
  if (columns != feature_count && columns != feature_count + label_count)
    throw DataError("line 1: expected " + std::to_string(feature_count) + " feature columns (or " +
                    std::to_string(feature_count + label_count) + " with labels), found " + std::to_string(columns));

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_on(lines[i], ',');
    if (cells.size() != columns)
      fail_at(i + 1, "expected " + std::to_string(columns) + " columns, found " + std::to_string(cells.size()));
    std::vector<double> row(feature_count);
    for (Index c = 0; c < feature_count; ++c)
      if (!parse_double(cells[c], row[c])) fail_at(i + 1, "non-numeric feature value '" + std::string(trim(cells[c])) + "'");
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_count));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Index c = 0; c < feature_count; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

Matrix load_csv_features(const std::filesystem::path& path, Index feature_count, Index label_count) {
  try {
    return parse_csv_features(read_file(path), feature_count, label_count);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_csv(const Dataset& data) {
  std::string out;
  for (Index c = 0; c < data.feature_count(); ++c) out += (c ? "," : "") + data.feature_names[c];
  for (Index c = 0; c < data.label_count(); ++c) out += "," + data.label_names[c];
  out += '\n';
  for (Index r = 0; r < data.rows(); ++r) {
    const auto x = data.x(r);
    for (Index c = 0; c < x.size(); ++c) {
      if (c) out += ',';
      out += shortest(x[c]);
    }
    for (auto v : data.y(r)) out += v ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_csv(data);
}

Dataset parse_sparse(std::string_view text, Index label_count, Index feature_count) {
  if (label_count == 0) throw DataError("label count must be at least 1");
  const auto lines = split_lines(text);

  struct Row {
    std::vector<std::pair<Index, double>> entries;
    std::vector<Index> labels;
  };
  std::vector<Row> rows;
  Index max_index = 0;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    std::string_view line = lines[i];
    if (trim(line).empty()) continue;
    Row row;
    std::string_view rest;
    if (line.front() == ' ' || line.front() == '\t') {
      rest = line;
    } else {
      const auto sp = line.find_first_of(" \t");
      const auto label_field = line.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view{} : line.substr(sp);
      if (label_field.find(':') != std::string_view::npos)
        fail_at(line_no, "missing label field (start the line with a space for an empty labelset)");
      for (auto tok : split_on(label_field, ',')) {
        Index id;
        if (!parse_index(tok, id)) fail_at(line_no, "invalid label '" + std::string(tok) + "'");
        if (id < 1 || id > label_count) fail_at(line_no, "label index out of range: " + std::to_string(id));
        row.labels.push_back(id - 1);
      }
    }
    std::set<Index> seen;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      const auto b = rest.find_first_not_of(" \t", pos);
      if (b == std::string_view::npos) break;
      auto e = rest.find_first_of(" \t", b);
      if (e == std::string_view::npos) e = rest.size();
      const auto tok = rest.substr(b, e - b);
      pos = e;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) fail_at(line_no, "expected index:value, got '" + std::string(tok) + "'");
      Index idx;
      double val;
      if (!parse_index(tok.substr(0, colon), idx) || idx < 1)
        fail_at(line_no, "feature index out of range in '" + std::string(tok) + "'");
      if (feature_count != 0 && idx > feature_count)
        fail_at(line_no, "feature index out of range: " + std::to_string(idx) + " > " + std::to_string(feature_count));
      if (!parse_double(tok.substr(colon + 1), val)) fail_at(line_no, "non-numeric value in '" + std::string(tok) + "'");
      if (!seen.insert(idx).second) fail_at(line_no, "duplicate feature index " + std::to_string(idx));
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx - 1, val);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no data rows");
  const Index d = feature_count != 0 ? feature_count : max_index;
  if (d == 0) throw DataError("no feature columns");

  Matrix features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  LabelMatrix labels = LabelMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(label_count));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    for (auto [idx, val] : rows[r].entries) features(ri, static_cast<Eigen::Index>(idx)) = val;
    for (auto l : rows[r].labels) labels(ri, static_cast<Eigen::Index>(l)) = 1;
  }
  return make_dataset(std::move(features), std::move(labels));
}

Dataset load_sparse(const std::filesystem::path& path, Index label_count, Index feature_count) {
  try {
    return parse_sparse(read_file(path), label_count, feature_count);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

StandardizationStats standardize_fit(const Matrix& features) {
  const auto n = features.rows();
  if (n < 2) throw DataError("standardization needs at least 2 rows");
  StandardizationStats stats;
  stats.means = features.colwise().mean().transpose();
  stats.sds.resize(features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    double ss = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double dev = features(r, c) - stats.means[c];
      ss += dev * dev;
    }
    stats.sds[c] = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return stats;
}

void standardize_row(const StandardizationStats& stats, FeatureView x, std::span<double> out) {
  if (x.size() != stats.dimension() || out.size() != x.size())
    throw DataError("feature dimension " + std::to_string(x.size()) + " does not match " +
                    std::to_string(stats.dimension()));
  for (Index c = 0; c < x.size(); ++c) {
    const double sd = stats.sds[static_cast<Eigen::Index>(c)];
    out[c] = sd > 0.0 ? (x[c] - stats.means[static_cast<Eigen::Index>(c)]) / sd : 0.0;
  }
}

Matrix standardize_apply(const StandardizationStats& stats, const Matrix& features) {
  if (static_cast<Index>(features.cols()) != stats.dimension())
    throw DataError("feature dimension " + std::to_string(features.cols()) + " does not match " +
                    std::to_string(stats.dimension()));
  Matrix z(features.rows(), features.cols());
  for (Eigen::Index r = 0; r < features.rows(); ++r)
    standardize_row(stats, row_view(features, static_cast<Index>(r)),
                    {z.data() + r * z.cols(), static_cast<Index>(z.cols())});
  return z;
}

SplitPair split_random(Index n, std::uint64_t seed) {
  if (n < 4) throw DataError("splitting needs at least 4 rows, got " + std::to_string(n));
  const auto order = random_permutation(n, seed);
  const Index half = (n + 1) / 2;
  SplitPair split;
  split.t1_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  split.t2_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  return split;
}

DatasetSummary dataset_summary(const Dataset& data) {
  DatasetSummary s;
  s.rows = data.rows();
  s.features = data.feature_count();
  s.labels = data.label_count();
  std::uint64_t total = 0;
  std::set<Labelset> distinct;
  for (Index r = 0; r < data.rows(); ++r) {
    const auto y = data.y(r);
    for (auto v : y) total += v;
    distinct.insert(to_labelset(y));
  }
  s.label_cardinality = data.rows() ? static_cast<double>(total) / static_cast<double>(data.rows()) : 0.0;
  s.distinct_labelsets = distinct.size();
  return s;
}

}  // namespace nldd
