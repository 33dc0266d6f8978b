#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace despar {

using Index = Eigen::Index;

/// Response vector y (length T) and regressor matrix X (T x N).
///
/// Construction validates T >= 2, N >= 1, matching row counts and finite
/// entries. Columns are addressed with 0-based indices; optional column
/// names are carried for reporting only.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> names = {});

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::MatrixXd& X() const noexcept { return X_; }
  Index T() const noexcept { return X_.rows(); }
  Index N() const noexcept { return X_.cols(); }

  Eigen::VectorXd column(Index j) const;

  /// X with column j removed; remaining columns keep their order.
  Eigen::MatrixXd without_column(Index j) const;

  /// Regression of column j on the other columns.
  Dataset nodewise(Index j) const;

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::string name(Index j) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
  std::vector<std::string> names_;
};

/// Sufficient statistics of the least-squares part of the lasso objective:
/// gram = X'X/T, xty = X'y/T, yty = y'y/T.
struct Moments {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;
  double yty = 0.0;
};

Moments compute_moments(const Dataset& data);

/// Centers y and the columns of X and scales the columns to unit variance
/// (1/T convention). Coefficients map back through coefficients_to_original.
struct Standardization {
  double y_mean = 0.0;
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;  // zero-variance columns keep scale 1

  Dataset apply(const Dataset& data) const;
  Eigen::VectorXd coefficients_to_original(const Eigen::VectorXd& beta_std) const;
  double intercept(const Eigen::VectorXd& beta_original) const;
};

Standardization fit_standardization(const Dataset& data);

}  // namespace despar
