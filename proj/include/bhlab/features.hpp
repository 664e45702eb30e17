#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bhlab::ml {

inline constexpr std::size_t kFeatureCount = 4;

/// Dense row-major matrix of real-valued features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  /// Throws WidthMismatch when the rows are ragged.
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  void append_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Per-feature (x - mean) / std, fitted on training rows only.
class Standardizer {
 public:
  void fit(const FeatureMatrix& x);
  FeatureMatrix transform(const FeatureMatrix& x) const;
  void transform_row(std::span<const double> in, std::span<double> out) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scale() const { return scale_; }
  void set(std::vector<double> mean, std::vector<double> scale);

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

}  // namespace bhlab::ml
