#include "despar/hac.hpp"

#include "despar/desparsify.hpp"
#include "despar/error.hpp"
#include "despar/nodewise.hpp"

#include <cmath>
#include <string>

namespace despar {

ScoreMatrix score_products(const DesparsifiedEstimate& estimate) {
  const Eigen::VectorXd& u = estimate.beta_init.residuals;
  ScoreMatrix scores;
  scores.w.resize(u.size(), estimate.h());
  for (Index i = 0; i < estimate.h(); ++i) {
    const Eigen::VectorXd& v = estimate.nodewise.fits[static_cast<std::size_t>(i)].v_hat;
    if (v.size() != u.size())
      throw Error(ErrorCode::DimensionMismatch, "nodewise residuals have the wrong length");
    scores.w.col(i) = v.cwiseProduct(u);
  }
  return scores;
}

Eigen::MatrixXd lag_cov(const ScoreMatrix& scores, Index lag) {
  const Index T = scores.T();
  if (lag < 0) throw Error(ErrorCode::InvalidArgument, "lag must be nonnegative");
  if (lag >= T)
    throw Error(ErrorCode::LagTooLarge,
                "lag " + std::to_string(lag) + " needs more than " + std::to_string(T) + " rows");
  const Index n = T - lag;
  // rows t = lag..T-1 paired with rows t-lag = 0..T-lag-1. Dividing by T
  // rather than T-lag keeps the Bartlett sum positive semidefinite.
  Eigen::MatrixXd xi = scores.w.bottomRows(n).transpose() * scores.w.topRows(n) / static_cast<double>(T);
  if (lag == 0) xi = 0.5 * (xi + xi.transpose()).eval();
  return xi;
}

int default_bandwidth(Index T, double delta_q) {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (!(delta_q > 0.0 && delta_q < 1.0))
    throw Error(ErrorCode::InvalidArgument, "delta_q must lie in (0, 1)");
  return static_cast<int>(std::ceil(std::pow(2.0 * static_cast<double>(T), delta_q)));
}

namespace {

void check_bandwidth(const ScoreMatrix& scores, int bandwidth) {
  if (bandwidth < 1 || bandwidth > scores.T())
    throw Error(ErrorCode::InvalidArgument, "bandwidth must lie in [1, T]");
}

Eigen::MatrixXd bartlett_sum(const std::vector<Eigen::MatrixXd>& xi, int bandwidth) {
  Eigen::MatrixXd omega = xi[0];
  for (int l = 1; l < bandwidth; ++l) {
    const double weight = 1.0 - static_cast<double>(l) / static_cast<double>(bandwidth);
    const auto& x = xi[static_cast<std::size_t>(l)];
    omega += weight * (x + x.transpose());
  }
  return omega;
}

}  // namespace

Eigen::MatrixXd bartlett_lrv(const ScoreMatrix& scores, int bandwidth) {
  check_bandwidth(scores, bandwidth);
  std::vector<Eigen::MatrixXd> xi;
  xi.reserve(static_cast<std::size_t>(bandwidth));
  for (int l = 0; l < bandwidth; ++l) xi.push_back(lag_cov(scores, l));
  return bartlett_sum(xi, bandwidth);
}

Eigen::VectorXd HacEstimate::marginal_variances() const {
  return Omega.diagonal().cwiseQuotient(tau_sq_H.cwiseProduct(tau_sq_H));
}

HacEstimate estimate_hac(const DesparsifiedEstimate& estimate, std::optional<int> bandwidth) {
  const ScoreMatrix scores = score_products(estimate);
  HacEstimate hac;
  hac.T = scores.T();
  hac.bandwidth = bandwidth.value_or(default_bandwidth(scores.T()));
  check_bandwidth(scores, hac.bandwidth);
  for (int l = 0; l < hac.bandwidth; ++l) hac.Xi.push_back(lag_cov(scores, l));
  hac.Omega = bartlett_sum(hac.Xi, hac.bandwidth);
  hac.tau_sq_H.resize(estimate.h());
  for (Index i = 0; i < estimate.h(); ++i)
    hac.tau_sq_H(i) = estimate.nodewise.fits[static_cast<std::size_t>(i)].tau_sq;
  return hac;
}

Eigen::MatrixXd sandwich_psi(const Eigen::MatrixXd& omega, const Eigen::VectorXd& tau_sq_H,
                             const Eigen::MatrixXd& R_H) {
  const Index h = omega.rows();
  if (omega.cols() != h || tau_sq_H.size() != h || R_H.cols() != h)
    throw Error(ErrorCode::DimensionMismatch, "Omega, tau^2 and R disagree on h");
  for (Index i = 0; i < h; ++i)
    if (!(tau_sq_H(i) > kTauFloor))
      throw Error(ErrorCode::SingularTau, "tau^2 at or below floor for target " + std::to_string(i));
  const Eigen::MatrixXd RD = R_H * tau_sq_H.cwiseInverse().asDiagonal();
  Eigen::MatrixXd psi = RD * omega * RD.transpose();
  return 0.5 * (psi + psi.transpose());
}

}  // namespace despar
