#include "despar/solver.hpp"

#include "despar/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace despar {

namespace {

constexpr double kRssFloor = 1e-300;
constexpr double kDirectSolveRcond = 1e-12;

double kkt_tolerance(const LassoProblem& problem) {
  return 1e-6 * std::max(1.0, problem.lambda_max());
}

// grad = target - gram * beta, touching only the nonzero coordinates.
Eigen::VectorXd fresh_gradient(const LassoProblem& problem, const Eigen::VectorXd& beta) {
  Eigen::VectorXd grad = problem.target;
  for (Index k = 0; k < beta.size(); ++k) {
    if (beta(k) != 0.0) grad.noalias() -= beta(k) * problem.gram->col(k);
  }
  return grad;
}

bool kkt_satisfied(const LassoProblem& problem, const Eigen::VectorXd& beta,
                   const Eigen::VectorXd& grad, double lambda, double tol) {
  for (Index j = 0; j < beta.size(); ++j) {
    if (j == problem.excluded || (*problem.gram)(j, j) <= 0.0) continue;
    if (beta(j) == 0.0) {
      if (std::abs(grad(j)) > lambda + tol) return false;
    } else {
      const double sign = beta(j) > 0.0 ? 1.0 : -1.0;
      if (std::abs(grad(j) - lambda * sign) > tol) return false;
    }
  }
  return true;
}

double moment_objective(const LassoProblem& problem, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& grad, double lambda) {
  return problem.target_sq - problem.target.dot(beta) - grad.dot(beta) +
         2.0 * lambda * beta.lpNorm<1>();
}

// Exact least squares for lambda = 0 when the free block of the Gram matrix
// is well conditioned. Returns false when the caller has to fall back to
// coordinate descent.
bool solve_unpenalized(const LassoProblem& problem, Eigen::VectorXd& beta) {
  const Index n = problem.N();
  const Index free = problem.excluded >= 0 ? n - 1 : n;
  if (free >= problem.T()) return false;
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(free));
  for (Index k = 0; k < n; ++k)
    if (k != problem.excluded) idx.push_back(k);
  const Eigen::MatrixXd sub = (*problem.gram)(idx, idx);
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success || llt.rcond() < kDirectSolveRcond) return false;
  const Eigen::VectorXd rhs = problem.target(idx);
  const Eigen::VectorXd sol = llt.solve(rhs);
  beta.setZero();
  beta(idx) = sol;
  return true;
}

struct DescentOutcome {
  int sweeps = 0;
  bool converged = false;
};

// Cyclic coordinate descent on the Gram form. grad tracks X'r/T and is
// updated incrementally each time a coefficient moves. Sweeps alternate
// between the full coordinate set and the current nonzeros: once the active
// sweeps settle, a full sweep either confirms the set or admits new members.
DescentOutcome coordinate_descent(const LassoProblem& problem, double lambda,
                                  const SolverConfig& config, Eigen::VectorXd& beta,
                                  std::vector<double>* trace) {
  const Eigen::MatrixXd& gram = *problem.gram;
  const Index n = problem.N();
  const double kkt_tol = kkt_tolerance(problem);
  Eigen::VectorXd grad = fresh_gradient(problem, beta);
  if (trace) trace->push_back(moment_objective(problem, beta, grad, lambda));

  std::vector<Index> all, active;
  for (Index j = 0; j < n; ++j)
    if (j != problem.excluded) all.push_back(j);

  auto sweep_over = [&](const std::vector<Index>& coords) {
    double max_change = 0.0;
    for (Index j : coords) {
      const double gjj = gram(j, j);
      const double old = beta(j);
      const double next = gjj > 0.0 ? soft_threshold(grad(j) + gjj * old, lambda) / gjj : 0.0;
      const double delta = next - old;
      if (delta != 0.0) {
        beta(j) = next;
        grad.noalias() -= delta * gram.col(j);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    return max_change;
  };
  auto settled = [&](double max_change) {
    return max_change < config.tol * std::max(1.0, beta.lpNorm<Eigen::Infinity>());
  };

  DescentOutcome out;
  bool full = true;
  for (int sweep = 1; sweep <= config.max_iter; ++sweep) {
    const double max_change = sweep_over(full ? all : active);
    if (trace) trace->push_back(moment_objective(problem, beta, grad, lambda));
    out.sweeps = sweep;
    if (full) {
      if (settled(max_change)) {
        grad = fresh_gradient(problem, beta);
        if (kkt_satisfied(problem, beta, grad, lambda, kkt_tol)) {
          out.converged = true;
          return out;
        }
      }
      active.clear();
      for (Index j : all)
        if (beta(j) != 0.0) active.push_back(j);
      full = active.empty();
    } else if (settled(max_change)) {
      full = true;
    }
  }
  return out;
}

LassoFit finish_fit(const LassoProblem& problem, double lambda, const SolverConfig& config,
                    Eigen::VectorXd beta, int sweeps, bool converged) {
  LassoFit fit;
  fit.lambda = lambda;
  fit.iterations = sweeps;
  fit.converged = converged;
  fit.residuals = problem.response;
  for (Index k = 0; k < beta.size(); ++k) {
    if (beta(k) != 0.0) {
      fit.residuals.noalias() -= beta(k) * problem.X->col(k);
      fit.support.push_back(k);
    }
  }
  fit.objective = fit.residuals.squaredNorm() / static_cast<double>(problem.T()) +
                  2.0 * lambda * beta.lpNorm<1>();
  fit.eligible = static_cast<Index>(fit.support.size()) <= config.support_cap(problem.T());
  fit.beta = std::move(beta);
  return fit;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "solver tol must be positive");
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
  if (max_support && *max_support < 1)
    throw Error(ErrorCode::InvalidArgument, "max_support must be at least 1");
  if (grid_size < 2) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 2");
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

LassoProblem LassoProblem::regression(const Dataset& data, const Moments& moments) {
  LassoProblem p;
  p.X = &data.X();
  p.gram = &moments.gram;
  p.response = data.y();
  p.target = moments.xty;
  p.target_sq = moments.yty;
  return p;
}

LassoProblem LassoProblem::nodewise(const Dataset& data, const Moments& moments, Index j) {
  if (data.N() < 2) throw Error(ErrorCode::InvalidArgument, "nodewise regression needs N >= 2");
  if (j < 0 || j >= data.N())
    throw Error(ErrorCode::InvalidArgument, "nodewise index " + std::to_string(j) + " out of range");
  LassoProblem p;
  p.X = &data.X();
  p.gram = &moments.gram;
  p.response = data.X().col(j);
  p.target = moments.gram.col(j);
  p.target(j) = 0.0;
  p.target_sq = moments.gram(j, j);
  p.excluded = j;
  return p;
}

double LassoProblem::lambda_max() const {
  double m = 0.0;
  for (Index k = 0; k < target.size(); ++k)
    if (k != excluded) m = std::max(m, std::abs(target(k)));
  return m;
}

LassoFit solve(const LassoProblem& problem, double lambda, const SolverConfig& config,
               const Eigen::VectorXd* warm_start) {
  config.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
  const Index n = problem.N();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  if (warm_start) {
    if (warm_start->size() != n)
      throw Error(ErrorCode::DimensionMismatch, "warm start has the wrong length");
    beta = *warm_start;
    if (problem.excluded >= 0) beta(problem.excluded) = 0.0;
  }
  for (Index j = 0; j < n; ++j) {
    if (j != problem.excluded && !((*problem.gram)(j, j) > 0.0)) {
      if (lambda == 0.0)
        throw Error(ErrorCode::ZeroVarianceColumn,
                    "column " + std::to_string(j) + " has zero norm and lambda = 0");
      beta(j) = 0.0;
    }
  }

  std::vector<double> trace;
  if (lambda == 0.0 && !config.record_trace && solve_unpenalized(problem, beta)) {
    return finish_fit(problem, lambda, config, std::move(beta), 0, true);
  }
  const DescentOutcome outcome =
      coordinate_descent(problem, lambda, config, beta, config.record_trace ? &trace : nullptr);
  LassoFit fit = finish_fit(problem, lambda, config, std::move(beta), outcome.sweeps,
                            outcome.converged);
  fit.objective_trace = std::move(trace);
  return fit;
}

std::vector<LassoFit> solve_path(const LassoProblem& problem, std::span<const double> grid,
                                 const SolverConfig& config) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] < grid[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "lambda grid must be strictly decreasing");
  std::vector<LassoFit> path;
  path.reserve(grid.size());
  for (double lambda : grid) {
    const Eigen::VectorXd* warm = path.empty() ? nullptr : &path.back().beta;
    path.push_back(solve(problem, lambda, config, warm));
  }
  return path;
}

LassoFit fit_lasso(const Dataset& data, double lambda, const SolverConfig& config,
                   const std::optional<Eigen::VectorXd>& warm_start) {
  const Moments moments = compute_moments(data);
  const LassoProblem problem = LassoProblem::regression(data, moments);
  return solve(problem, lambda, config, warm_start ? &*warm_start : nullptr);
}

std::vector<double> lambda_grid(double lambda_max, Index T, int grid_size) {
  if (grid_size < 2) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 2");
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  const double floor = 1.0 / (10.0 * static_cast<double>(T));
  if (!(lambda_max > 0.0)) return {floor};
  const double lo = std::max(floor, 1e-4 * lambda_max);
  if (lo >= lambda_max) return {lambda_max};

  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  const double log_hi = std::log(lambda_max);
  const double step = (std::log(lo) - log_hi) / static_cast<double>(grid_size - 1);
  grid.front() = lambda_max;
  for (int i = 1; i < grid_size - 1; ++i) grid[static_cast<std::size_t>(i)] = std::exp(log_hi + i * step);
  grid.back() = lo;
  return grid;
}

std::vector<double> lambda_grid(const Dataset& data, int grid_size) {
  const double lambda_max =
      (data.X().transpose() * data.y()).cwiseAbs().maxCoeff() / static_cast<double>(data.T());
  return lambda_grid(lambda_max, data.T(), grid_size);
}

std::vector<LassoFit> fit_path(const Dataset& data, std::span<const double> grid,
                               const SolverConfig& config) {
  const Moments moments = compute_moments(data);
  return solve_path(LassoProblem::regression(data, moments), grid, config);
}

double information_criterion(const Criterion& criterion, double rss, Index k, Index N, Index T) {
  const double t = static_cast<double>(T);
  const double kk = static_cast<double>(k);
  const double fit_term = t * std::log(std::max(rss, kRssFloor) / t);
  switch (criterion.kind) {
    case CriterionKind::AIC:
      return fit_term + 2.0 * kk;
    case CriterionKind::BIC:
      return fit_term + kk * std::log(t);
    case CriterionKind::EBIC:
      return fit_term + kk * std::log(t) +
             2.0 * criterion.ebic_gamma * kk * std::log(static_cast<double>(N));
  }
  return fit_term;
}

std::size_t select_index_by_ic(std::span<const LassoFit> path, const Criterion& criterion,
                               Index N, Index T) {
  std::size_t best = path.size();
  double best_ic = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const LassoFit& fit = path[i];
    if (!fit.eligible) continue;
    const double ic = information_criterion(criterion, fit.rss(),
                                            static_cast<Index>(fit.support.size()), N, T);
    if (best == path.size() || ic < best_ic ||
        (ic == best_ic && fit.lambda > path[best].lambda)) {
      best = i;
      best_ic = ic;
    }
  }
  if (best == path.size())
    throw Error(ErrorCode::NoEligibleFit, "every fit on the path exceeds the support cap");
  return best;
}

LassoFit select_by_ic(std::span<const LassoFit> path, const Criterion& criterion, Index N,
                      Index T) {
  return path[select_index_by_ic(path, criterion, N, T)];
}

std::vector<LassoFit> selection_path(const LassoProblem& problem, const SolverConfig& config) {
  const std::vector<double> grid = lambda_grid(problem.lambda_max(), problem.T(), config.grid_size);
  // The path stops at the first fit past the support cap. Supports almost
  // never shrink again further down the grid, and the near-interpolating
  // fits there are by far the slowest to converge.
  std::vector<LassoFit> path;
  path.reserve(grid.size());
  for (double lambda : grid) {
    const Eigen::VectorXd* warm = path.empty() ? nullptr : &path.back().beta;
    path.push_back(solve(problem, lambda, config, warm));
    if (!path.back().eligible) break;
  }
  return path;
}

LassoFit fit_selected(const LassoProblem& problem, const Criterion& criterion,
                      const SolverConfig& config) {
  std::vector<LassoFit> path = selection_path(problem, config);
  const Index free = problem.excluded >= 0 ? problem.N() - 1 : problem.N();
  const std::size_t best = select_index_by_ic(path, criterion, free, problem.T());
  return std::move(path[best]);
}

}  // namespace despar
