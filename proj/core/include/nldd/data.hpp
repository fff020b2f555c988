#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nldd/types.hpp"

namespace nldd {

/// N instances with d real features and L binary labels.
struct Dataset {
  Matrix features;     // N x d
  LabelMatrix labels;  // N x L, entries 0/1
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;

  Index rows() const { return static_cast<Index>(features.rows()); }
  Index feature_count() const { return static_cast<Index>(features.cols()); }
  Index label_count() const { return static_cast<Index>(labels.cols()); }

  FeatureView x(Index i) const { return row_view(features, i); }
  LabelView y(Index i) const { return row_view(labels, i); }

  /// Throws DataError if any invariant is broken.
  void validate() const;

  /// Rows in the given order (indices may repeat).
  Dataset subset(std::span<const Index> indices) const;
};

/// Builds a Dataset with default names "x1.." and "y1..".
Dataset make_dataset(Matrix features, LabelMatrix labels);

/// Header row, comma separated, the last `label_count` columns are labels.
Dataset load_csv(const std::filesystem::path& path, Index label_count);
Dataset parse_csv(std::string_view text, Index label_count);

/// Feature rows for prediction: a headed CSV whose column count is either
/// feature_count, or feature_count + label_count (trailing labels ignored).
Matrix load_csv_features(const std::filesystem::path& path, Index feature_count, Index label_count);
Matrix parse_csv_features(std::string_view text, Index feature_count, Index label_count);

/// Writes numbers in shortest round-trip form so that load_csv reproduces
/// the dataset exactly.
void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string format_csv(const Dataset& data);

/// svmlight-like multi-label format:
///
///     1,3 2:1 5:0.5
///      4:1            (leading space: empty labelset)
///
/// Indices are 1-based. With feature_count == 0 the dimension is the largest
/// index in the file; otherwise indices above feature_count are rejected.
Dataset load_sparse(const std::filesystem::path& path, Index label_count, Index feature_count = 0);
Dataset parse_sparse(std::string_view text, Index label_count, Index feature_count = 0);

struct StandardizationStats {
  Vector means;
  Vector sds;  // sample standard deviation (divisor N-1)

  Index dimension() const { return static_cast<Index>(means.size()); }
};

StandardizationStats standardize_fit(const Matrix& features);
inline StandardizationStats standardize_fit(const Dataset& train) { return standardize_fit(train.features); }

/// z = (x - mean) / sd per column; zero-variance columns become 0.
Matrix standardize_apply(const StandardizationStats& stats, const Matrix& features);
void standardize_row(const StandardizationStats& stats, FeatureView x, std::span<double> out);

struct SplitPair {
  std::vector<Index> t1_indices;  // ceil(N/2) rows
  std::vector<Index> t2_indices;  // floor(N/2) rows
};

SplitPair split_random(Index n, std::uint64_t seed);
inline SplitPair split_random(const Dataset& train, std::uint64_t seed) { return split_random(train.rows(), seed); }

struct DatasetSummary {
  Index rows = 0;
  Index features = 0;
  Index labels = 0;
  double label_cardinality = 0.0;
  Index distinct_labelsets = 0;
};

DatasetSummary dataset_summary(const Dataset& data);

}  // namespace nldd
