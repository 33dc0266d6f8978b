#pragma once

#include "despar/dataset.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace despar {

/// Lasso objective, in this library always
///
///     ||y - X b||_2^2 / T + 2 lambda ||b||_1
///
/// with no intercept. Penalties from the 1/(2T), lambda convention must be
/// halved by the caller before use.
struct SolverConfig {
  double tol = 1e-7;         ///< max coefficient change per sweep, relative to max(1, |b|_inf)
  int max_iter = 100000;     ///< sweeps
  std::optional<Index> max_support;  ///< defaults to floor(T/2)
  int grid_size = 200;
  bool record_trace = false;  ///< keep the objective after every sweep

  Index support_cap(Index T) const { return max_support.value_or(T / 2); }
  void validate() const;
};

struct LassoFit {
  Eigen::VectorXd beta;
  double lambda = 0.0;
  Eigen::VectorXd residuals;
  std::vector<Index> support;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
  bool eligible = true;               ///< support within the configured cap
  std::vector<double> objective_trace;  ///< only with SolverConfig::record_trace

  double rss() const { return residuals.squaredNorm(); }
};

double soft_threshold(double z, double gamma);

/// A lasso problem in Gram form. The least-squares part is expressed through
/// gram (X'X/T), target (X'response/T) and target_sq (response'response/T);
/// X and response are kept to materialise residuals. An excluded coordinate
/// is pinned at zero, which is how nodewise regressions reuse the full Gram
/// matrix without copying X_{-j}.
///
/// The referenced matrices must outlive the problem.
struct LassoProblem {
  const Eigen::MatrixXd* X = nullptr;
  const Eigen::MatrixXd* gram = nullptr;
  Eigen::VectorXd response;
  Eigen::VectorXd target;
  double target_sq = 0.0;
  Index excluded = -1;

  static LassoProblem regression(const Dataset& data, const Moments& moments);
  /// Column j regressed on every other column.
  static LassoProblem nodewise(const Dataset& data, const Moments& moments, Index j);

  Index T() const { return X->rows(); }
  Index N() const { return X->cols(); }
  /// Smallest penalty with an all-zero solution: max_k |target_k|, k != excluded.
  double lambda_max() const;
};

LassoFit solve(const LassoProblem& problem, double lambda, const SolverConfig& config,
               const Eigen::VectorXd* warm_start = nullptr);

/// Warm-started fits along a strictly decreasing grid.
std::vector<LassoFit> solve_path(const LassoProblem& problem, std::span<const double> grid,
                                 const SolverConfig& config);

LassoFit fit_lasso(const Dataset& data, double lambda, const SolverConfig& config = {},
                   const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// Log-equispaced grid from lambda_max down to max(1/(10T), 1e-4 lambda_max),
/// largest first. If lambda_max is zero the grid degenerates to {1/(10T)}; if
/// lambda_max is at or below the floor it is {lambda_max}.
std::vector<double> lambda_grid(double lambda_max, Index T, int grid_size);
std::vector<double> lambda_grid(const Dataset& data, int grid_size);

std::vector<LassoFit> fit_path(const Dataset& data, std::span<const double> grid,
                               const SolverConfig& config = {});

enum class CriterionKind { AIC, BIC, EBIC };

struct Criterion {
  CriterionKind kind = CriterionKind::BIC;
  double ebic_gamma = 1.0;

  static Criterion aic() { return {CriterionKind::AIC, 0.0}; }
  static Criterion bic() { return {CriterionKind::BIC, 0.0}; }
  static Criterion ebic(double gamma = 1.0) { return {CriterionKind::EBIC, gamma}; }
};

/// T ln(RSS/T) plus the criterion's complexity penalty; RSS floored at 1e-300.
double information_criterion(const Criterion& criterion, double rss, Index k, Index N, Index T);

/// Position of the eligible fit with the smallest criterion; ties go to the
/// larger lambda. Throws NoEligibleFit.
std::size_t select_index_by_ic(std::span<const LassoFit> path, const Criterion& criterion,
                               Index N, Index T);

LassoFit select_by_ic(std::span<const LassoFit> path, const Criterion& criterion, Index N,
                      Index T);

/// Warm-started path over lambda_grid(problem.lambda_max(), T,
/// config.grid_size), stopped after the first fit whose support exceeds the cap.
std::vector<LassoFit> selection_path(const LassoProblem& problem, const SolverConfig& config);

/// selection_path followed by select_by_ic. N in the criterion counts the
/// free coordinates.
LassoFit fit_selected(const LassoProblem& problem, const Criterion& criterion,
                      const SolverConfig& config);

}  // namespace despar
