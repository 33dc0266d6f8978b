#pragma once

#include "despar/dataset.hpp"
#include "despar/desparsify.hpp"
#include "despar/hac.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace despar {

/// Linear hypothesis R b_H = q over the targets H. R is P x h.
struct Restriction {
  std::vector<Index> H;
  Eigen::MatrixXd R;
  Eigen::VectorXd q;

  Index P() const { return R.rows(); }
  /// Throws InvalidArgument on shape mismatch, empty R, non-finite or all-zero rows.
  void validate() const;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// sqrt((omega_jj / tau_j^4) / T) for each target.
Eigen::VectorXd standard_errors(const HacEstimate& hac);

/// b_j -/+ z_{alpha/2} se_j. alpha = 1 gives zero-width intervals.
std::vector<Interval> confidence_intervals(const DesparsifiedEstimate& estimate,
                                           const HacEstimate& hac, double alpha);

/// sqrt(T) (b_j - null_j) / sqrt(omega_jj / tau_j^4).
Eigen::VectorXd z_statistics(const DesparsifiedEstimate& estimate, const HacEstimate& hac,
                             const Eigen::VectorXd& null_values);

struct WaldResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  Index P = 0;
};

/// (R b - q)' [Psi/T]^{-1} (R b - q) against chi^2_P. Psi is stored into
/// hac.Psi. Throws SingularPsi when Psi has condition number above 1e12.
WaldResult wald_test(const DesparsifiedEstimate& estimate, HacEstimate& hac,
                     const Restriction& restriction);

struct InferenceReport {
  std::vector<Index> H;
  Eigen::VectorXd b_H;
  Eigen::VectorXd se;
  Eigen::VectorXd ci_lower;
  Eigen::VectorXd ci_upper;
  Eigen::VectorXd z_stats;  ///< against zero
  std::optional<WaldResult> wald;
  double alpha = 0.05;
  int bandwidth = 1;
};

InferenceReport make_report(const DesparsifiedEstimate& estimate, HacEstimate& hac,
                            double alpha,
                            const std::optional<Restriction>& restriction = std::nullopt);

}  // namespace despar
