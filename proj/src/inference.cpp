#include "despar/inference.hpp"

#include "despar/distributions.hpp"
#include "despar/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace despar {

namespace {

constexpr double kMaxPsiCondition = 1e12;

double critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  if (alpha == 1.0) return 0.0;
  return dist::normal_quantile(1.0 - alpha / 2.0);
}

void check_tau(const HacEstimate& hac) {
  for (Index i = 0; i < hac.tau_sq_H.size(); ++i)
    if (!(hac.tau_sq_H(i) > kTauFloor))
      throw Error(ErrorCode::SingularTau, "tau^2 at or below floor for target " + std::to_string(i));
}

}  // namespace

void Restriction::validate() const {
  if (R.rows() < 1) throw Error(ErrorCode::InvalidArgument, "restriction needs at least one row");
  if (R.cols() != static_cast<Index>(H.size()))
    throw Error(ErrorCode::DimensionMismatch, "R must have one column per target");
  if (q.size() != R.rows()) throw Error(ErrorCode::DimensionMismatch, "q must have P entries");
  if (!R.allFinite() || !q.allFinite())
    throw Error(ErrorCode::InvalidArgument, "restriction has non-finite entries");
  for (Index p = 0; p < R.rows(); ++p)
    if (R.row(p).lpNorm<1>() == 0.0)
      throw Error(ErrorCode::InvalidArgument, "restriction row " + std::to_string(p) + " is zero");
}

Eigen::VectorXd standard_errors(const HacEstimate& hac) {
  check_tau(hac);
  return (hac.marginal_variances() / static_cast<double>(hac.T)).cwiseMax(0.0).cwiseSqrt();
}

std::vector<Interval> confidence_intervals(const DesparsifiedEstimate& estimate,
                                           const HacEstimate& hac, double alpha) {
  const double z = critical_value(alpha);
  const Eigen::VectorXd se = standard_errors(hac);
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(estimate.h()));
  for (Index i = 0; i < estimate.h(); ++i)
    out.push_back({estimate.b_H(i) - z * se(i), estimate.b_H(i) + z * se(i)});
  return out;
}

Eigen::VectorXd z_statistics(const DesparsifiedEstimate& estimate, const HacEstimate& hac,
                             const Eigen::VectorXd& null_values) {
  if (null_values.size() != estimate.h())
    throw Error(ErrorCode::DimensionMismatch, "need one null value per target");
  check_tau(hac);
  const double root_t = std::sqrt(static_cast<double>(hac.T));
  const Eigen::VectorXd sd = hac.marginal_variances().cwiseMax(0.0).cwiseSqrt();
  return root_t * (estimate.b_H - null_values).cwiseQuotient(sd);
}

WaldResult wald_test(const DesparsifiedEstimate& estimate, HacEstimate& hac,
                     const Restriction& restriction) {
  restriction.validate();
  if (restriction.H != estimate.H)
    throw Error(ErrorCode::IndexMismatch, "restriction targets differ from the estimate's");
  const Eigen::MatrixXd psi = sandwich_psi(hac.Omega, hac.tau_sq_H, restriction.R);
  hac.Psi = psi;

  const Eigen::MatrixXd scaled = psi / static_cast<double>(hac.T);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxPsiCondition)
    throw Error(ErrorCode::SingularPsi, "Psi is numerically singular");

  const Eigen::VectorXd diff = restriction.R * estimate.b_H - restriction.q;
  const Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  WaldResult out;
  out.P = restriction.P();
  out.statistic = std::max(0.0, diff.dot(llt.solve(diff)));
  out.pvalue = dist::chi_squared_survival(out.statistic, static_cast<int>(out.P));
  return out;
}

InferenceReport make_report(const DesparsifiedEstimate& estimate, HacEstimate& hac, double alpha,
                            const std::optional<Restriction>& restriction) {
  InferenceReport report;
  report.H = estimate.H;
  report.b_H = estimate.b_H;
  report.alpha = alpha;
  report.bandwidth = hac.bandwidth;
  report.se = standard_errors(hac);
  const auto intervals = confidence_intervals(estimate, hac, alpha);
  report.ci_lower.resize(estimate.h());
  report.ci_upper.resize(estimate.h());
  for (Index i = 0; i < estimate.h(); ++i) {
    report.ci_lower(i) = intervals[static_cast<std::size_t>(i)].lower;
    report.ci_upper(i) = intervals[static_cast<std::size_t>(i)].upper;
  }
  report.z_stats = z_statistics(estimate, hac, Eigen::VectorXd::Zero(estimate.h()));
  if (restriction) report.wald = wald_test(estimate, hac, *restriction);
  return report;
}

}  // namespace despar
