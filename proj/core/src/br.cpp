#include "nldd/br.hpp"

#include <algorithm>
#include <map>

#include "nldd/parallel.hpp"

namespace nldd {

BRModel br_fit(const Dataset& train, double lambda, unsigned threads) {
  train.validate();
  BRModel model;
  model.stats = standardize_fit(train);
  model.label_names = train.label_names;
  const Matrix z = standardize_apply(model.stats, train.features);

  const Index labels = train.label_count();
  model.classifiers.resize(labels);
  LogisticOptions options;
  options.lambda = lambda;
  parallel_for(labels, threads, [&](Index l) {
    Labelset column(train.rows());
    for (Index r = 0; r < train.rows(); ++r)
      column[r] = train.labels(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l));
    const auto positives = std::count(column.begin(), column.end(), std::uint8_t{1});
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(column.size()))
      model.classifiers[l] = fit_fallback(column);
    else
      model.classifiers[l] = fit_logistic(z, column, options);
  });
  return model;
}

Vector br_predict_proba_standardized(const BRModel& model, FeatureView z) {
  Vector p(static_cast<Eigen::Index>(model.label_count()));
  for (Index l = 0; l < model.label_count(); ++l) p[static_cast<Eigen::Index>(l)] = predict_proba(model.classifiers[l], z);
  return p;
}

Vector br_predict_proba(const BRModel& model, FeatureView x) {
  std::vector<double> z(x.size());
  standardize_row(model.stats, x, z);
  return br_predict_proba_standardized(model, z);
}

Labelset threshold(const Vector& probabilities) {
  Labelset out(static_cast<Index>(probabilities.size()));
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) out[static_cast<Index>(i)] = probabilities[i] >= 0.5 ? 1 : 0;
  return out;
}

Labelset br_predict(const BRModel& model, FeatureView x) { return threshold(br_predict_proba(model, x)); }

std::size_t hamming_distance(LabelView a, LabelView b) {
  if (a.size() != b.size()) throw DataError("labelset lengths differ");
  std::size_t d = 0;
  for (Index i = 0; i < a.size(); ++i) d += (a[i] != 0) != (b[i] != 0);
  return d;
}

LabelsetIndex::LabelsetIndex(const LabelMatrix& labels) {
  std::map<Labelset, Index> counts;
  for (Index r = 0; r < static_cast<Index>(labels.rows()); ++r) ++counts[to_labelset(row_view(labels, r))];
  if (counts.empty()) throw DataError("no training labelsets");
  for (auto& [set, count] : counts) {
    labelsets_.push_back(set);
    counts_.push_back(count);
  }
}

const Labelset& LabelsetIndex::nearest(LabelView query) const {
  // Entries are sorted, so keeping the first of equal (distance, count)
  // candidates yields the lexicographically smallest.
  Index best = 0;
  std::size_t best_distance = hamming_distance(query, labelsets_[0]);
  for (Index i = 1; i < labelsets_.size(); ++i) {
    const auto d = hamming_distance(query, labelsets_[i]);
    if (d < best_distance || (d == best_distance && counts_[i] > counts_[best])) {
      best = i;
      best_distance = d;
    }
  }
  return labelsets_[best];
}

bool LabelsetIndex::contains(LabelView query) const {
  return std::binary_search(labelsets_.begin(), labelsets_.end(), to_labelset(query));
}

Labelset smbr_predict(const BRModel& model, const LabelsetIndex& index, FeatureView x) {
  return index.nearest(br_predict(model, x));
}

Labelset smbr_predict(const BRModel& model, const Dataset& train, FeatureView x) {
  return smbr_predict(model, LabelsetIndex(train.labels), x);
}

}  // namespace nldd
