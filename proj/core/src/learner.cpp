#include "nldd/learner.hpp"

#include <algorithm>
#include <cmath>

namespace nldd {
namespace {

// log(1 + e^f) without overflow.
double log1p_exp(double f) { return f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f)); }

Matrix with_intercept(const Matrix& features) {
  Matrix a(features.rows(), features.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(features.cols()) = features;
  return a;
}

Vector to_targets(LabelView targets) {
  Vector y(static_cast<Eigen::Index>(targets.size()));
  for (Index i = 0; i < targets.size(); ++i) y[static_cast<Eigen::Index>(i)] = targets[i] ? 1.0 : 0.0;
  return y;
}

double objective(const Matrix& design, const Vector& y, double lambda, const Vector& w) {
  const Vector f = design * w;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) ll += y[i] * f[i] - log1p_exp(f[i]);
  return ll - 0.5 * lambda * w.tail(w.size() - 1).squaredNorm();
}

Vector gradient(const Matrix& design, const Vector& y, double lambda, const Vector& w) {
  const Vector f = design * w;
  Vector residual(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) residual[i] = y[i] - inverse_logit(f[i]);
  Vector g = design.transpose() * residual;
  g.tail(g.size() - 1) -= lambda * w.tail(w.size() - 1);
  return g;
}

void check_shapes(const Matrix& features, LabelView targets) {
  if (static_cast<Index>(features.rows()) != targets.size())
    throw DataError("feature rows (" + std::to_string(features.rows()) + ") do not match targets (" +
                    std::to_string(targets.size()) + ")");
}

}  // namespace

double inverse_logit(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double logistic_objective(const Matrix& features, LabelView targets, double lambda, const Vector& weights) {
  check_shapes(features, targets);
  return objective(with_intercept(features), to_targets(targets), lambda, weights);
}

Vector logistic_gradient(const Matrix& features, LabelView targets, double lambda, const Vector& weights) {
  check_shapes(features, targets);
  return gradient(with_intercept(features), to_targets(targets), lambda, weights);
}

LinearProbModel fit_logistic(const Matrix& features, LabelView targets, const LogisticOptions& options) {
  check_shapes(features, targets);
  if (!(options.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!features.allFinite()) throw DataError("non-finite feature value");
  const auto positives = std::count_if(targets.begin(), targets.end(), [](auto v) { return v != 0; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(targets.size()))
    throw TrainingError("targets contain a single class; use fit_fallback");

  const Matrix design = with_intercept(features);
  const Vector y = to_targets(targets);
  const auto p = design.cols();

  LinearProbModel model;
  model.lambda = options.lambda;
  model.weights = Vector::Zero(p);
  double current = objective(design, y, options.lambda, model.weights);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Vector f = design * model.weights;
    Vector prob(f.size());
    Vector w(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      prob[i] = inverse_logit(f[i]);
      w[i] = prob[i] * (1.0 - prob[i]);
    }
    Vector g = design.transpose() * (y - prob);
    g.tail(p - 1) -= options.lambda * model.weights.tail(p - 1);
    if (g.lpNorm<Eigen::Infinity>() < options.tol) {
      model.converged = true;
      break;
    }

    Matrix hessian = design.transpose() * (design.array().colwise() * w.array()).matrix();
    hessian.diagonal().tail(p - 1).array() += options.lambda;
    const Vector step = hessian.selfadjointView<Eigen::Lower>().ldlt().solve(g);

    const double slack = 1e-12 * std::fabs(current);
    double scale = 1.0;
    Vector candidate = model.weights + step;
    double value = objective(design, y, options.lambda, candidate);
    for (int h = 0; h < 20 && !(value >= current - slack); ++h) {
      scale *= 0.5;
      candidate = model.weights + scale * step;
      value = objective(design, y, options.lambda, candidate);
    }
    model.iterations = iter + 1;
    if (!(value >= current - slack)) break;  // no ascent direction left at working precision

    const double change = (scale * step).lpNorm<Eigen::Infinity>();
    model.weights = candidate;
    current = value;
    if (change < options.tol) {
      model.converged = true;
      break;
    }
  }
  if (!model.weights.allFinite()) throw TrainingError("logistic regression diverged");
  return model;
}

ConstantProbModel fit_fallback(LabelView targets) {
  const auto k = std::count_if(targets.begin(), targets.end(), [](auto v) { return v != 0; });
  return {(static_cast<double>(k) + 1.0) / (static_cast<double>(targets.size()) + 2.0)};
}

double predict_proba(const LinearProbModel& model, FeatureView x) {
  if (x.size() != model.dimension())
    throw DataError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                    std::to_string(model.dimension()));
  double f = model.weights[0];
  for (Index j = 0; j < x.size(); ++j) f += model.weights[static_cast<Eigen::Index>(j + 1)] * x[j];
  return std::clamp(inverse_logit(f), kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double predict_proba(const ConstantProbModel& model, FeatureView) { return model.p; }

double predict_proba(const ProbModel& model, FeatureView x) {
  return std::visit([&](const auto& m) { return predict_proba(m, x); }, model);
}

}  // namespace nldd
