#pragma once

#include <map>

#include "nldd/data.hpp"
#include "nldd/learner.hpp"

namespace nldd {

/// Binary relevance: one probabilistic classifier per label.
struct BRModel {
  std::vector<ProbModel> classifiers;
  StandardizationStats stats;
  std::vector<std::string> label_names;

  Index label_count() const { return classifiers.size(); }
  Index feature_count() const { return stats.dimension(); }
};

/// Fits standardization on `train`, then one classifier per label. Constant
/// label columns get a ConstantProbModel. Label fits may run on `threads`
/// workers; the result does not depend on the thread count.
BRModel br_fit(const Dataset& train, double lambda = 1.0, unsigned threads = 1);

/// p-hat, every entry strictly inside (0, 1).
Vector br_predict_proba(const BRModel& model, FeatureView x);

/// Evaluates already-standardized input.
Vector br_predict_proba_standardized(const BRModel& model, FeatureView z);

/// p-hat thresholded at 0.5 (ties go to 1).
Labelset br_predict(const BRModel& model, FeatureView x);
Labelset threshold(const Vector& probabilities);

/// Distinct training labelsets with their frequencies, for subset mapping.
class LabelsetIndex {
public:
  explicit LabelsetIndex(const LabelMatrix& labels);

  const std::vector<Labelset>& labelsets() const { return labelsets_; }
  const std::vector<Index>& counts() const { return counts_; }

  /// Nearest labelset by Hamming distance; ties go to the more frequent
  /// labelset, then to the lexicographically smaller one.
  const Labelset& nearest(LabelView query) const;

  bool contains(LabelView query) const;

private:
  std::vector<Labelset> labelsets_;  // lexicographically sorted
  std::vector<Index> counts_;
};

/// BR output mapped onto the closest observed training labelset.
Labelset smbr_predict(const BRModel& model, const Dataset& train, FeatureView x);
Labelset smbr_predict(const BRModel& model, const LabelsetIndex& index, FeatureView x);

std::size_t hamming_distance(LabelView a, LabelView b);

}  // namespace nldd
