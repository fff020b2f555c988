#pragma once

#include <vector>

#include "nldd/types.hpp"

namespace nldd {

double hamming_loss(LabelView y, LabelView yhat);
double zero_one_loss(LabelView y, LabelView yhat);
/// |y & yhat| / |y | yhat|; 1 when both are empty.
double jaccard(LabelView y, LabelView yhat);
/// 2 |y & yhat| / (|y| + |yhat|); 1 when both are empty.
double f_measure(LabelView y, LabelView yhat);

struct InstanceMetrics {
  double hamming = 0.0;
  double zero_one = 0.0;
  double jaccard = 0.0;
  double f_measure = 0.0;
};

InstanceMetrics score_instance(LabelView y, LabelView yhat);

struct MetricsReport {
  double hamming = 0.0;
  double zero_one = 0.0;
  double jaccard = 0.0;
  double f_measure = 0.0;
  Index n_instances = 0;
};

/// Arithmetic means. Throws std::invalid_argument on an empty list.
MetricsReport aggregate(std::span<const InstanceMetrics> per_instance);

}  // namespace nldd
