#pragma once

#include "despar/dataset.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace despar {

struct DesparsifiedEstimate;

/// Score products w(t, i) = v_hat_{H[i], t} * u_hat_t, one column per target.
struct ScoreMatrix {
  Eigen::MatrixXd w;  ///< T x h

  Index T() const { return w.rows(); }
  Index h() const { return w.cols(); }
};

ScoreMatrix score_products(const DesparsifiedEstimate& estimate);

/// Non-centred lag-l cross product (1/T) sum_{t>l} w_t w_{t-l}'.
/// Throws LagTooLarge when l >= T.
Eigen::MatrixXd lag_cov(const ScoreMatrix& scores, Index lag);

/// ceil((2T)^delta_q).
int default_bandwidth(Index T, double delta_q = 0.1);

/// Bartlett-weighted long-run covariance
///   Xi(0) + sum_{l=1}^{Q-1} (1 - l/Q) (Xi(l) + Xi(l)'),
/// accumulated in ascending lag order.
Eigen::MatrixXd bartlett_lrv(const ScoreMatrix& scores, int bandwidth);

struct HacEstimate {
  int bandwidth = 1;                 ///< Q_T
  std::vector<Eigen::MatrixXd> Xi;   ///< lags 0..Q_T-1
  Eigen::MatrixXd Omega;             ///< h x h
  Eigen::VectorXd tau_sq_H;
  std::optional<Eigen::MatrixXd> Psi;  ///< set once a restriction is applied
  Index T = 0;

  /// Diagonal of Upsilon^-2 Omega Upsilon^-2, i.e. omega_jj / tau_j^4.
  Eigen::VectorXd marginal_variances() const;
};

/// Scores, lag covariances and Omega for an estimate. bandwidth unset means
/// default_bandwidth(T).
HacEstimate estimate_hac(const DesparsifiedEstimate& estimate,
                         std::optional<int> bandwidth = std::nullopt);

/// (R_H D) Omega (R_H D)' with D = diag(1/tau_j^2); R_H is P x h over the
/// targets. Throws SingularTau when some tau_j^2 is at or below the floor.
Eigen::MatrixXd sandwich_psi(const Eigen::MatrixXd& omega, const Eigen::VectorXd& tau_sq_H,
                             const Eigen::MatrixXd& R_H);

}  // namespace despar
