#include "despar/dataset.hpp"

#include "despar/error.hpp"

#include <cmath>
#include <string>

namespace despar {

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> names)
    : y_(std::move(y)), X_(std::move(X)), names_(std::move(names)) {
  if (X_.rows() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two observations");
  if (X_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "need at least one regressor");
  if (y_.size() != X_.rows())
    throw Error(ErrorCode::DimensionMismatch, "y has " + std::to_string(y_.size()) +
                                                  " entries, X has " + std::to_string(X_.rows()) +
                                                  " rows");
  if (!y_.allFinite() || !X_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "non-finite value in data");
  if (!names_.empty() && static_cast<Index>(names_.size()) != X_.cols())
    throw Error(ErrorCode::DimensionMismatch, "column name count does not match X");
}

Eigen::VectorXd Dataset::column(Index j) const {
  if (j < 0 || j >= N()) throw Error(ErrorCode::InvalidArgument, "column index out of range");
  return X_.col(j);
}

Eigen::MatrixXd Dataset::without_column(Index j) const {
  if (j < 0 || j >= N()) throw Error(ErrorCode::InvalidArgument, "column index out of range");
  Eigen::MatrixXd out(T(), N() - 1);
  out.leftCols(j) = X_.leftCols(j);
  out.rightCols(N() - 1 - j) = X_.rightCols(N() - 1 - j);
  return out;
}

Dataset Dataset::nodewise(Index j) const {
  if (N() < 2) throw Error(ErrorCode::InvalidArgument, "nodewise regression needs N >= 2");
  std::vector<std::string> names;
  if (!names_.empty()) {
    names = names_;
    names.erase(names.begin() + j);
  }
  return Dataset(column(j), without_column(j), std::move(names));
}

std::string Dataset::name(Index j) const {
  if (!names_.empty()) return names_.at(static_cast<std::size_t>(j));
  return "x" + std::to_string(j + 1);
}

Moments compute_moments(const Dataset& data) {
  const double inv_t = 1.0 / static_cast<double>(data.T());
  Moments m;
  m.gram = Eigen::MatrixXd::Zero(data.N(), data.N());
  m.gram.selfadjointView<Eigen::Lower>().rankUpdate(data.X().transpose(), inv_t);
  m.gram.triangularView<Eigen::StrictlyUpper>() = m.gram.transpose();
  // Divided rather than multiplied by 1/T so lambda_max agrees bitwise with
  // max_j |x_j'y| / T computed directly.
  const double t = static_cast<double>(data.T());
  m.xty = data.X().transpose() * data.y() / t;
  m.yty = data.y().squaredNorm() / t;
  return m;
}

Standardization fit_standardization(const Dataset& data) {
  const double t = static_cast<double>(data.T());
  Standardization s;
  s.y_mean = data.y().mean();
  s.x_mean = data.X().colwise().mean().transpose();
  s.x_scale.resize(data.N());
  for (Index j = 0; j < data.N(); ++j) {
    const double var = (data.X().col(j).array() - s.x_mean(j)).square().sum() / t;
    s.x_scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Dataset Standardization::apply(const Dataset& data) const {
  Eigen::MatrixXd X = data.X();
  X.rowwise() -= x_mean.transpose();
  X.array().rowwise() /= x_scale.transpose().array();
  Eigen::VectorXd y = data.y().array() - y_mean;
  return Dataset(std::move(y), std::move(X), data.names());
}

Eigen::VectorXd Standardization::coefficients_to_original(const Eigen::VectorXd& beta_std) const {
  return beta_std.cwiseQuotient(x_scale);
}

double Standardization::intercept(const Eigen::VectorXd& beta_original) const {
  return y_mean - x_mean.dot(beta_original);
}

}  // namespace despar
