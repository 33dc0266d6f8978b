#pragma once

#include "despar/dataset.hpp"
#include "despar/nodewise.hpp"
#include "despar/solver.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace despar {

struct DesparsifyConfig {
  std::optional<double> lambda;  ///< unset: chosen by `criterion` over the lambda grid
  Criterion criterion = Criterion::bic();
  NodewiseTuning nodewise;
  SolverConfig solver;
  int threads = 1;
};

/// b_H = beta_H + Theta_H X'(y - X beta) / T for the targets H. The full
/// N-vector of desparsified estimates is never formed.
struct DesparsifiedEstimate {
  Eigen::VectorXd b_H;
  LassoFit beta_init;
  NodewiseSet nodewise;
  std::vector<Index> H;

  Index h() const { return static_cast<Index>(H.size()); }
  Index T() const { return beta_init.residuals.size(); }
};

DesparsifiedEstimate desparsified_lasso(const Dataset& data, std::span<const Index> H,
                                        const DesparsifyConfig& config = {});
DesparsifiedEstimate desparsified_lasso(const Dataset& data, const Moments& moments,
                                        std::span<const Index> H,
                                        const DesparsifyConfig& config);

/// Recomputes b_H from the stored lasso fit and theta rows.
Eigen::VectorXd recompute_b(const DesparsifiedEstimate& estimate, const Dataset& data);

namespace oracle {

/// Bias term sqrt(T) (e_j' - Theta_j Sigma_hat)(beta_hat - beta_true) for each
/// j in H. Needs the true coefficients, so it only makes sense on simulated data.
Eigen::VectorXd delta_bias(const DesparsifiedEstimate& estimate,
                           const Eigen::VectorXd& beta_true, const Dataset& data);

}  // namespace oracle

}  // namespace despar
