#include "despar/nodewise.hpp"

#include "despar/error.hpp"
#include "despar/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace despar {

namespace {

NodewiseFit to_nodewise_fit(const LassoFit& fit, Index j) {
  const Index n = fit.beta.size();
  NodewiseFit out;
  out.j = j;
  out.lambda_j = fit.lambda;
  out.gamma.resize(n - 1);
  out.gamma.head(j) = fit.beta.head(j);
  out.gamma.tail(n - 1 - j) = fit.beta.tail(n - 1 - j);
  out.v_hat = fit.residuals;
  out.converged = fit.converged;
  const double t = static_cast<double>(fit.residuals.size());
  const double tau_sq = out.v_hat.squaredNorm() / t + 2.0 * fit.lambda * out.gamma.lpNorm<1>();
  out.tau_floored = !(tau_sq > kTauFloor);
  out.tau_sq = out.tau_floored ? kTauFloor : tau_sq;
  return out;
}

}  // namespace

Eigen::VectorXd NodewiseFit::gamma_full() const {
  const Index n = gamma.size() + 1;
  Eigen::VectorXd full(n);
  full.head(j) = gamma.head(j);
  full(j) = 0.0;
  full.tail(n - 1 - j) = gamma.tail(n - 1 - j);
  return full;
}

NodewiseFit fit_nodewise(const Dataset& data, Index j, double lambda_j, const SolverConfig& config) {
  const Moments moments = compute_moments(data);
  return fit_nodewise(data, moments, j, lambda_j, config);
}

NodewiseFit fit_nodewise(const Dataset& data, const Moments& moments, Index j, double lambda_j,
                         const SolverConfig& config) {
  const LassoProblem problem = LassoProblem::nodewise(data, moments, j);
  return to_nodewise_fit(solve(problem, lambda_j, config), j);
}

NodewiseFit fit_nodewise_selected(const Dataset& data, const Moments& moments, Index j,
                                  const Criterion& criterion, const SolverConfig& config) {
  const LassoProblem problem = LassoProblem::nodewise(data, moments, j);
  return to_nodewise_fit(fit_selected(problem, criterion, config), j);
}

NodewiseSet build_theta(std::vector<NodewiseFit> fits, std::span<const Index> H, Index N) {
  if (H.empty()) throw Error(ErrorCode::EmptyH, "no inference targets");
  if (fits.size() != H.size())
    throw Error(ErrorCode::IndexMismatch, "expected one nodewise fit per target");
  std::set<Index> seen;
  for (Index j : H) {
    if (j < 0 || j >= N) throw Error(ErrorCode::IndexMismatch, "target index out of range");
    if (!seen.insert(j).second) throw Error(ErrorCode::IndexMismatch, "duplicate target index");
  }

  NodewiseSet set;
  set.H.assign(H.begin(), H.end());
  set.theta_rows.resize(static_cast<Index>(H.size()), N);
  for (std::size_t i = 0; i < H.size(); ++i) {
    const NodewiseFit& fit = fits[i];
    if (fit.j != H[i])
      throw Error(ErrorCode::IndexMismatch, "fit for column " + std::to_string(fit.j) +
                                                " does not match target " + std::to_string(H[i]));
    if (fit.gamma.size() != N - 1)
      throw Error(ErrorCode::DimensionMismatch, "nodewise coefficients have the wrong length");
    const double inv_tau = 1.0 / std::max(fit.tau_sq, kTauFloor);
    auto row = set.theta_rows.row(static_cast<Index>(i));
    row = -inv_tau * fit.gamma_full().transpose();
    row(fit.j) = inv_tau;
  }
  set.fits = std::move(fits);
  return set;
}

NodewiseSet fit_nodewise_set(const Dataset& data, const Moments& moments,
                             std::span<const Index> H, const NodewiseTuning& tuning,
                             const SolverConfig& config, int threads) {
  if (H.empty()) throw Error(ErrorCode::EmptyH, "no inference targets");
  std::vector<NodewiseFit> fits(H.size());
  parallel_for(H.size(), threads, [&](std::size_t i) {
    fits[i] = tuning.lambda
                  ? fit_nodewise(data, moments, H[i], *tuning.lambda, config)
                  : fit_nodewise_selected(data, moments, H[i], tuning.criterion, config);
  });
  return build_theta(std::move(fits), H, data.N());
}

std::vector<double> kkt_certificate(const NodewiseSet& set, const Dataset& data) {
  const Moments moments = compute_moments(data);
  std::vector<double> out;
  out.reserve(set.H.size());
  for (Index i = 0; i < set.h(); ++i) {
    Eigen::VectorXd prod = moments.gram * set.theta_rows.row(i).transpose();
    prod(set.H[static_cast<std::size_t>(i)]) -= 1.0;
    out.push_back(prod.cwiseAbs().maxCoeff());
  }
  return out;
}

PopulationNodewise population_nodewise(const Eigen::MatrixXd& Sigma, Index j) {
  const Index n = Sigma.rows();
  if (Sigma.cols() != n) throw Error(ErrorCode::DimensionMismatch, "Sigma must be square");
  if (j < 0 || j >= n) throw Error(ErrorCode::InvalidArgument, "index out of range");
  if (n == 1) return {Eigen::VectorXd(0), Sigma(0, 0)};

  std::vector<Index> rest;
  for (Index k = 0; k < n; ++k)
    if (k != j) rest.push_back(k);
  const Eigen::MatrixXd sub = Sigma(rest, rest);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw Error(ErrorCode::SingularSigma, "Sigma_{-j,-j} is numerically singular");

  const Eigen::VectorXd cross = Sigma(rest, j);
  PopulationNodewise out;
  out.gamma = sub.llt().solve(cross);
  out.tau_sq = Sigma(j, j) - cross.dot(out.gamma);
  return out;
}

}  // namespace despar
