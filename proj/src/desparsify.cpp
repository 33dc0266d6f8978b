#include "despar/desparsify.hpp"

#include "despar/error.hpp"

#include <cmath>
#include <string>

namespace despar {

namespace {

Eigen::VectorXd correction(const Eigen::MatrixXd& theta_rows, const Dataset& data,
                           const Eigen::VectorXd& residuals) {
  const Eigen::VectorXd score = data.X().transpose() * residuals / static_cast<double>(data.T());
  return theta_rows * score;
}

}  // namespace

DesparsifiedEstimate desparsified_lasso(const Dataset& data, std::span<const Index> H,
                                        const DesparsifyConfig& config) {
  const Moments moments = compute_moments(data);
  return desparsified_lasso(data, moments, H, config);
}

DesparsifiedEstimate desparsified_lasso(const Dataset& data, const Moments& moments,
                                        std::span<const Index> H,
                                        const DesparsifyConfig& config) {
  if (H.empty()) throw Error(ErrorCode::EmptyH, "no inference targets");
  for (Index j : H)
    if (j < 0 || j >= data.N())
      throw Error(ErrorCode::InvalidArgument, "target index " + std::to_string(j) + " out of range");

  const LassoProblem problem = LassoProblem::regression(data, moments);
  DesparsifiedEstimate est;
  est.H.assign(H.begin(), H.end());
  est.beta_init = config.lambda ? solve(problem, *config.lambda, config.solver)
                                : fit_selected(problem, config.criterion, config.solver);
  est.nodewise =
      fit_nodewise_set(data, moments, H, config.nodewise, config.solver, config.threads);

  const Eigen::VectorXd beta_H = est.beta_init.beta(est.H);
  est.b_H = beta_H + correction(est.nodewise.theta_rows, data, est.beta_init.residuals);
  return est;
}

Eigen::VectorXd recompute_b(const DesparsifiedEstimate& estimate, const Dataset& data) {
  const Eigen::VectorXd residuals = data.y() - data.X() * estimate.beta_init.beta;
  return estimate.beta_init.beta(estimate.H) +
         correction(estimate.nodewise.theta_rows, data, residuals);
}

namespace oracle {

Eigen::VectorXd delta_bias(const DesparsifiedEstimate& estimate,
                           const Eigen::VectorXd& beta_true, const Dataset& data) {
  if (beta_true.size() != data.N())
    throw Error(ErrorCode::DimensionMismatch, "beta_true must have length N");
  const Eigen::VectorXd diff = estimate.beta_init.beta - beta_true;
  // (e_j' - Theta_j Sigma_hat) diff = diff_j - Theta_j X'X diff / T
  const Eigen::VectorXd x_diff = data.X() * diff;
  const Eigen::VectorXd sigma_diff = data.X().transpose() * x_diff / static_cast<double>(data.T());
  const Eigen::VectorXd delta = diff(estimate.H) - estimate.nodewise.theta_rows * sigma_diff;
  return std::sqrt(static_cast<double>(data.T())) * delta;
}

}  // namespace oracle

}  // namespace despar
