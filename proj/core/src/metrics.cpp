#include "nldd/metrics.hpp"

#include <stdexcept>

namespace nldd {
namespace {

struct Counts {
  std::size_t mismatched = 0;
  std::size_t both = 0;
  std::size_t truth = 0;
  std::size_t predicted = 0;
};

Counts count(LabelView y, LabelView yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("labelset lengths differ");
  if (y.empty()) throw std::invalid_argument("empty labelset");
  Counts c;
  for (Index i = 0; i < y.size(); ++i) {
    const bool a = y[i] != 0;
    const bool b = yhat[i] != 0;
    c.mismatched += a != b;
    c.both += a && b;
    c.truth += a;
    c.predicted += b;
  }
  return c;
}

}  // namespace

double hamming_loss(LabelView y, LabelView yhat) {
  return static_cast<double>(count(y, yhat).mismatched) / static_cast<double>(y.size());
}

double zero_one_loss(LabelView y, LabelView yhat) { return count(y, yhat).mismatched == 0 ? 0.0 : 1.0; }

double jaccard(LabelView y, LabelView yhat) {
  const auto c = count(y, yhat);
  const auto united = c.truth + c.predicted - c.both;
  return united == 0 ? 1.0 : static_cast<double>(c.both) / static_cast<double>(united);
}

double f_measure(LabelView y, LabelView yhat) {
  const auto c = count(y, yhat);
  const auto denom = c.truth + c.predicted;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.both) / static_cast<double>(denom);
}

InstanceMetrics score_instance(LabelView y, LabelView yhat) {
  return {hamming_loss(y, yhat), zero_one_loss(y, yhat), jaccard(y, yhat), f_measure(y, yhat)};
}

MetricsReport aggregate(std::span<const InstanceMetrics> per_instance) {
  if (per_instance.empty()) throw std::invalid_argument("cannot aggregate an empty metric list");
  MetricsReport r;
  for (const auto& m : per_instance) {
    r.hamming += m.hamming;
    r.zero_one += m.zero_one;
    r.jaccard += m.jaccard;
    r.f_measure += m.f_measure;
  }
  const auto n = static_cast<double>(per_instance.size());
  r.hamming /= n;
  r.zero_one /= n;
  r.jaccard /= n;
  r.f_measure /= n;
  r.n_instances = per_instance.size();
  return r;
}

}  // namespace nldd
