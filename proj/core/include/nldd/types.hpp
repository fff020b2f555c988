#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nldd {

/// Row-major so that a single instance is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using LabelMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A labelset y in {0,1}^L, i.e. one vertex of the unit hypercube.
using Labelset = std::vector<std::uint8_t>;
using LabelView = std::span<const std::uint8_t>;
using FeatureView = std::span<const double>;

using Index = std::size_t;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, inconsistent dimensions, bad model files.
class DataError : public Error {
public:
  using Error::Error;
};

/// Fitting could not produce a usable model.
class TrainingError : public Error {
public:
  using Error::Error;
};

inline FeatureView row_view(const Matrix& m, Index i) {
  return {m.data() + i * static_cast<Index>(m.cols()), static_cast<Index>(m.cols())};
}

inline LabelView row_view(const LabelMatrix& m, Index i) {
  return {m.data() + i * static_cast<Index>(m.cols()), static_cast<Index>(m.cols())};
}

inline Labelset to_labelset(LabelView v) { return {v.begin(), v.end()}; }

}  // namespace nldd
