#pragma once

#include "despar/dataset.hpp"
#include "despar/solver.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace despar {

/// tau^2 values below this are replaced by it before any division.
inline constexpr double kTauFloor = 1e-12;

struct NodewiseFit {
  Index j = 0;
  Eigen::VectorXd gamma;  ///< length N-1, entries for k != j in ascending k
  double lambda_j = 0.0;
  double tau_sq = 0.0;    ///< ||v_hat||^2/T + 2 lambda_j ||gamma||_1, floored at kTauFloor
  Eigen::VectorXd v_hat;  ///< x_j - X_{-j} gamma
  bool tau_floored = false;
  bool converged = true;

  /// gamma scattered into a length-N vector with a zero at j.
  Eigen::VectorXd gamma_full() const;
};

/// Rows of the relaxed inverse for the inference targets H only.
struct NodewiseSet {
  std::vector<Index> H;
  std::vector<NodewiseFit> fits;  ///< fits[i] belongs to H[i]
  Eigen::MatrixXd theta_rows;     ///< h x N

  Index h() const { return static_cast<Index>(H.size()); }
};

NodewiseFit fit_nodewise(const Dataset& data, Index j, double lambda_j,
                         const SolverConfig& config = {});
NodewiseFit fit_nodewise(const Dataset& data, const Moments& moments, Index j, double lambda_j,
                         const SolverConfig& config);

/// Nodewise regression with lambda_j chosen by an information criterion over
/// the nodewise grid (same grid rule and support cap as the main regression).
NodewiseFit fit_nodewise_selected(const Dataset& data, const Moments& moments, Index j,
                                  const Criterion& criterion, const SolverConfig& config);

/// Assembles theta_rows: row i holds 1/tau^2 at H[i] and -gamma/tau^2 elsewhere.
/// Throws IndexMismatch when the fits do not match H one-to-one.
NodewiseSet build_theta(std::vector<NodewiseFit> fits, std::span<const Index> H, Index N);

/// How nodewise penalties are chosen: a fixed lambda_j for every target, or
/// per-target selection by criterion.
struct NodewiseTuning {
  std::optional<double> lambda;
  Criterion criterion = Criterion::bic();
};

/// Runs the nodewise regressions for every j in H (in parallel when
/// threads > 1; results do not depend on the thread count).
NodewiseSet fit_nodewise_set(const Dataset& data, const Moments& moments,
                             std::span<const Index> H, const NodewiseTuning& tuning,
                             const SolverConfig& config, int threads = 1);

/// max_k |(Sigma_hat Theta_j')_k - (e_j)_k| for every row. Off the diagonal
/// the KKT conditions bound the entries by lambda_j / tau_j^2; with the
/// 2 lambda_j ||gamma_j||_1 term in tau_j^2 the diagonal entry is
/// lambda_j ||gamma_j||_1 / tau_j^2, so the bound lambda_j / tau_j^2 on the
/// whole row needs ||gamma_j||_1 <= 1.
std::vector<double> kkt_certificate(const NodewiseSet& set, const Dataset& data);

struct PopulationNodewise {
  Eigen::VectorXd gamma;  ///< length N-1, entries for k != j
  double tau_sq = 0.0;
};

/// Population projection of x_j on the other coordinates under covariance
/// Sigma. Throws SingularSigma when Sigma_{-j,-j} has condition number > 1e12.
PopulationNodewise population_nodewise(const Eigen::MatrixXd& Sigma, Index j);

}  // namespace despar
