#include "despar/diagnostics.hpp"

#include "despar/error.hpp"
#include "despar/parallel.hpp"
#include "despar/solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace despar {

double weak_sparsity_norm(const Eigen::VectorXd& beta, double r) {
  if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "r must lie in [0, 1)");
  double total = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double a = std::abs(beta(j));
    if (a == 0.0) continue;
    total += r == 0.0 ? 1.0 : std::pow(a, r);
  }
  return total;
}

std::vector<Index> sparsity_index_set(const Eigen::VectorXd& beta, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  std::vector<Index> out;
  for (Index j = 0; j < beta.size(); ++j)
    if (std::abs(beta(j)) > lambda) out.push_back(j);
  return out;
}

SparsityProfile sparsity_profile(const Eigen::VectorXd& beta, double r, double lambda) {
  SparsityProfile p;
  p.r = r;
  p.s_r = weak_sparsity_norm(beta, r);
  p.S_lambda = sparsity_index_set(beta, lambda);
  p.cardinality = static_cast<Index>(p.S_lambda.size());
  return p;
}

namespace {

std::vector<bool> membership(std::span<const Index> S, Index n) {
  if (S.empty()) throw Error(ErrorCode::EmptyS, "index set S is empty");
  std::vector<bool> in_s(static_cast<std::size_t>(n), false);
  for (Index j : S) {
    if (j < 0 || j >= n) throw Error(ErrorCode::InvalidArgument, "index in S out of range");
    in_s[static_cast<std::size_t>(j)] = true;
  }
  return in_s;
}

// Euclidean projection onto {a >= 0, sum a = radius}.
void project_simplex(Eigen::VectorXd& a, double radius) {
  const Index n = a.size();
  if (n == 0) return;
  std::vector<double> sorted(a.data(), a.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index i = 0; i < n; ++i) {
    cumsum += sorted[static_cast<std::size_t>(i)];
    const double candidate = (cumsum - radius) / static_cast<double>(i + 1);
    if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
  }
  a = (a.array() - theta).cwiseMax(0.0);
}

// Projection onto {a >= 0, sum a <= radius}.
void project_capped(Eigen::VectorXd& a, double radius) {
  a = a.cwiseMax(0.0);
  if (a.sum() > radius) project_simplex(a, radius);
}

struct OrthantSolution {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd z;
};

// Minimises |S| z'Sigma z over the orthant with signs `sign`, subject to
// ||z_S||_1 = 1 and ||z_{S^c}||_1 <= 3. In magnitudes a = sign .* z the
// feasible set is a simplex times a capped simplex, so accelerated projected
// gradient converges to the orthant minimum.
OrthantSolution solve_orthant(const Eigen::MatrixXd& Sigma, const std::vector<bool>& in_s,
                              const Eigen::VectorXd& sign, double lipschitz) {
  const Index n = Sigma.rows();
  const double card =
      static_cast<double>(std::count(in_s.begin(), in_s.end(), true));
  const Eigen::MatrixXd M = card * (sign.asDiagonal() * Sigma * sign.asDiagonal());

  std::vector<Index> s_idx, c_idx;
  for (Index j = 0; j < n; ++j) (in_s[static_cast<std::size_t>(j)] ? s_idx : c_idx).push_back(j);

  auto project = [&](Eigen::VectorXd& a) {
    Eigen::VectorXd as = a(s_idx);
    project_simplex(as, 1.0);
    a(s_idx) = as;
    if (!c_idx.empty()) {
      Eigen::VectorXd ac = a(c_idx);
      project_capped(ac, 3.0);
      a(c_idx) = ac;
    }
  };

  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  a(s_idx).setConstant(1.0 / card);
  Eigen::VectorXd look = a;
  double t = 1.0;
  const double step = 1.0 / lipschitz;
  double value = a.dot(M * a);
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd next = look - step * 2.0 * (M * look);
    project(next);
    const double next_value = next.dot(M * next);
    if (next_value > value) {  // restart momentum
      t = 1.0;
      look = a;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    look = next + ((t - 1.0) / t_next) * (next - a);
    const double change = (next - a).lpNorm<Eigen::Infinity>();
    a = next;
    value = next_value;
    t = t_next;
    if (change < 1e-13) break;
  }
  return {value, sign.cwiseProduct(a)};
}

}  // namespace

double compatibility_ratio(const Eigen::MatrixXd& Sigma, std::span<const Index> S,
                           const Eigen::VectorXd& z) {
  const auto in_s = membership(S, Sigma.rows());
  double l1_s = 0.0;
  for (Index j = 0; j < z.size(); ++j)
    if (in_s[static_cast<std::size_t>(j)]) l1_s += std::abs(z(j));
  return static_cast<double>(S.size()) * z.dot(Sigma * z) / (l1_s * l1_s);
}

bool in_compatibility_cone(std::span<const Index> S, const Eigen::VectorXd& z) {
  const auto in_s = membership(S, z.size());
  double l1_s = 0.0, l1_c = 0.0;
  for (Index j = 0; j < z.size(); ++j)
    (in_s[static_cast<std::size_t>(j)] ? l1_s : l1_c) += std::abs(z(j));
  return l1_s > 0.0 && l1_c <= 3.0 * l1_s;
}

CompatibilityEstimate compatibility_constant(const Eigen::MatrixXd& Sigma,
                                             std::span<const Index> S,
                                             CompatibilityMethod method, std::uint64_t seed,
                                             int samples) {
  const Index n = Sigma.rows();
  if (Sigma.cols() != n) throw Error(ErrorCode::DimensionMismatch, "Sigma must be square");
  const auto in_s = membership(S, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Sigma, Eigen::EigenvaluesOnly);
  const double lipschitz = 2.0 * static_cast<double>(S.size()) *
                           std::max(eig.eigenvalues().maxCoeff(), 1e-300);

  CompatibilityEstimate est;
  est.method = method;
  est.min_eigenvalue = eig.eigenvalues().minCoeff();
  OrthantSolution best;

  if (method == CompatibilityMethod::ExhaustiveSmall) {
    if (n > 8) throw Error(ErrorCode::InvalidArgument, "exhaustive search is limited to N <= 8");
    est.heuristic_upper_bound = false;
    // z and -z give the same ratio, so coordinate 0 keeps a + sign.
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
      Eigen::VectorXd sign = Eigen::VectorXd::Ones(n);
      for (Index j = 1; j < n; ++j)
        if (mask & (1u << (j - 1))) sign(j) = -1.0;
      OrthantSolution sol = solve_orthant(Sigma, in_s, sign, lipschitz);
      if (sol.value < best.value) best = std::move(sol);
    }
  } else {
    if (samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
    Rng rng = make_rng(seed, 0);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // best sampled ratio per sign pattern, keyed by the pattern's bits
    std::map<std::vector<bool>, double> patterns;
    Eigen::VectorXd z(n);
    for (int i = 0; i < samples; ++i) {
      double l1_s = 0.0, l1_c = 0.0;
      for (Index j = 0; j < n; ++j) {
        z(j) = normal(rng);
        (in_s[static_cast<std::size_t>(j)] ? l1_s : l1_c) += std::abs(z(j));
      }
      if (l1_c > 0.0) {
        const double scale = unif(rng) * 3.0 * l1_s / l1_c;
        for (Index j = 0; j < n; ++j)
          if (!in_s[static_cast<std::size_t>(j)]) z(j) *= scale;
      }
      const double ratio = compatibility_ratio(Sigma, S, z);
      if (ratio < best.value) best = {ratio, z};
      std::vector<bool> key(static_cast<std::size_t>(n));
      const double flip = z(0) < 0.0 ? -1.0 : 1.0;
      for (Index j = 0; j < n; ++j) key[static_cast<std::size_t>(j)] = flip * z(j) < 0.0;
      auto [it, inserted] = patterns.emplace(key, ratio);
      if (!inserted) it->second = std::min(it->second, ratio);
    }
    // refine the most promising orthants exactly
    std::vector<std::pair<double, std::vector<bool>>> ranked;
    for (auto& [key, ratio] : patterns) ranked.emplace_back(ratio, key);
    const std::size_t keep = std::min<std::size_t>(ranked.size(), 32);
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                      ranked.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < keep; ++i) {
      Eigen::VectorXd sign(n);
      for (Index j = 0; j < n; ++j) sign(j) = ranked[i].second[static_cast<std::size_t>(j)] ? -1.0 : 1.0;
      OrthantSolution sol = solve_orthant(Sigma, in_s, sign, lipschitz);
      if (sol.value < best.value) best = std::move(sol);
    }
  }
  est.value = best.value;
  est.minimizer = std::move(best.z);
  return est;
}

double covariance_closeness(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "matrices differ in shape");
  return (a - b).cwiseAbs().maxCoeff();
}

double covariance_closeness(const Dataset& data, const Eigen::MatrixXd& Sigma) {
  if (Sigma.rows() != data.N() || Sigma.cols() != data.N())
    throw Error(ErrorCode::DimensionMismatch, "Sigma must be N x N");
  return covariance_closeness(compute_moments(data).gram, Sigma);
}

double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != beta_true.size())
    throw Error(ErrorCode::DimensionMismatch, "coefficient vectors differ in length");
  return (beta_hat - beta_true).lpNorm<1>();
}

double prediction_error(const Dataset& data, const Eigen::VectorXd& beta_hat,
                        const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != data.N() || beta_true.size() != data.N())
    throw Error(ErrorCode::DimensionMismatch, "coefficient vectors must have length N");
  return (data.X() * (beta_hat - beta_true)).squaredNorm() / static_cast<double>(data.T());
}

std::vector<DecayRow> error_decay_study(const ScenarioConfig& scenario,
                                        std::span<const Index> T_list, ErrorMetric metric,
                                        const ExperimentOptions& options) {
  if (T_list.empty()) throw Error(ErrorCode::InvalidArgument, "T_list is empty");
  for (std::size_t i = 1; i < T_list.size(); ++i)
    if (!(T_list[i] > T_list[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "T_list must be strictly increasing");
  std::vector<DecayRow> rows;
  for (Index T : T_list) {
    ScenarioConfig config = scenario;
    config.T = T;
    config.validate();
    std::vector<double> errors(static_cast<std::size_t>(config.replications),
                               std::numeric_limits<double>::quiet_NaN());
    parallel_for(errors.size(), options.threads, [&](std::size_t r) {
      const SimulatedData sim = simulate_replication(config, static_cast<int>(r));
      try {
        const Moments moments = compute_moments(sim.data);
        const LassoFit fit = fit_selected(LassoProblem::regression(sim.data, moments),
                                          options.estimator.criterion, options.estimator.solver);
        if (!fit.converged) return;
        errors[r] = metric == ErrorMetric::L1Estimation
                        ? estimation_error(fit.beta, sim.beta_true)
                        : prediction_error(sim.data, fit.beta, sim.beta_true);
      } catch (const Error& e) {
        if (!e.is_numerical()) throw;
      }
    });
    DecayRow row;
    row.T = T;
    row.replications = config.replications;
    std::vector<double> ok;
    for (double e : errors) {
      if (std::isnan(e)) ++row.excluded;
      else ok.push_back(e);
    }
    if (!ok.empty()) {
      const std::size_t mid = ok.size() / 2;
      std::nth_element(ok.begin(), ok.begin() + static_cast<std::ptrdiff_t>(mid), ok.end());
      double median = ok[mid];
      if (ok.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(ok.begin(), ok.begin() + static_cast<std::ptrdiff_t>(mid)));
      }
      row.median_error = median;
    } else {
      row.median_error = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace despar
