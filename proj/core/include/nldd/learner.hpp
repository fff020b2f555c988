#pragma once

#include <variant>

#include "nldd/types.hpp"

namespace nldd {

/// L2-regularized logistic regression. weights[0] is the intercept.
struct LinearProbModel {
  Vector weights;
  double lambda = 1.0;
  bool converged = false;
  int iterations = 0;

  Index dimension() const { return static_cast<Index>(weights.size()) - 1; }
};

/// Used when a label column is constant in the training rows.
struct ConstantProbModel {
  double p = 0.5;
};

using ProbModel = std::variant<LinearProbModel, ConstantProbModel>;

struct LogisticOptions {
  double lambda = 1.0;
  int max_iter = 100;
  double tol = 1e-8;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Newton/IRLS maximization of
///
///     sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)] - lambda/2 * |w_{1..d}|^2
///
/// with step halving whenever a full step would lower the objective.
/// Throws TrainingError when `targets` holds a single class.
LinearProbModel fit_logistic(const Matrix& features, LabelView targets, const LogisticOptions& options = {});

/// Laplace-smoothed rate (k + 1) / (n + 2).
ConstantProbModel fit_fallback(LabelView targets);

double predict_proba(const LinearProbModel& model, FeatureView x);
double predict_proba(const ConstantProbModel& model, FeatureView x);
double predict_proba(const ProbModel& model, FeatureView x);

/// Penalized log-likelihood and its gradient; exposed for verification.
double logistic_objective(const Matrix& features, LabelView targets, double lambda, const Vector& weights);
Vector logistic_gradient(const Matrix& features, LabelView targets, double lambda, const Vector& weights);

double inverse_logit(double f);
double logit(double p);

}  // namespace nldd
