#include "despar/simulate.hpp"

#include "despar/distributions.hpp"
#include "despar/error.hpp"
#include "despar/hac.hpp"
#include "despar/parallel.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace despar {

namespace {

constexpr double kArdlA1 = 0.15;
constexpr double kArdlA4 = -0.1;
constexpr Index kArdlBlock = 5;
constexpr double kFactorAr = 0.5;

// Replication r draws from stream r + 1; stream 0 is reserved for draws made
// once per experiment (factor loadings).
constexpr std::uint64_t kExperimentStream = 0;

std::uint64_t replication_stream(int replication) {
  return static_cast<std::uint64_t>(replication) + 1;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string ScenarioConfig::name() const {
  return std::visit(
      Overloaded{
          [](const ArdlScenario& s) {
            return std::string(s.errors == ErrorLaw::IID ? "ardl-iid" : "ardl-garch");
          },
          [](const FactorScenario&) { return std::string("factor"); },
          [](const Var1Scenario& s) {
            return std::string(s.mode == GrangerMode::Size ? "var-size" : "var-power");
          },
      },
      kind);
}

void ScenarioConfig::validate() const {
  if (T < 2) throw Error(ErrorCode::BadDimension, "T must be at least 2");
  if (replications < 1) throw Error(ErrorCode::InvalidArgument, "replications must be at least 1");
  if (burn_in < 0) throw Error(ErrorCode::InvalidArgument, "burn_in must be nonnegative");
  if (!(innovation_scale >= 0.0) || !std::isfinite(innovation_scale))
    throw Error(ErrorCode::InvalidArgument, "innovation_scale must be finite and nonnegative");
  std::visit(Overloaded{
                 [&](const ArdlScenario&) {
                   if (N < 1 + kArdlBlock || (N - 1) % kArdlBlock != 0)
                     throw Error(ErrorCode::BadDimension,
                                 "ARDL design needs N - 1 to be a positive multiple of 5, got N = " +
                                     std::to_string(N));
                 },
                 [&](const FactorScenario&) {
                   if (N < 2) throw Error(ErrorCode::BadDimension, "factor design needs N >= 2");
                   if (ardl_sparsity(N) + 1 > N)
                     throw Error(ErrorCode::BadDimension, "factor design needs N >= s + 1");
                 },
                 [&](const Var1Scenario&) {
                   if (N < 4 || N % 2 != 0)
                     throw Error(ErrorCode::BadDimension,
                                 "VAR design needs an even N >= 4, got N = " + std::to_string(N));
                 },
             },
             kind);
}

ScenarioConfig ScenarioConfig::from_name(const std::string& name, Index N, Index T) {
  ScenarioConfig c;
  c.N = N;
  c.T = T;
  if (name == "ardl-iid") c.kind = ArdlScenario{ErrorLaw::IID};
  else if (name == "ardl-garch") c.kind = ArdlScenario{ErrorLaw::GARCH};
  else if (name == "factor") c.kind = FactorScenario{};
  else if (name == "var-size") c.kind = Var1Scenario{GrangerMode::Size};
  else if (name == "var-power") c.kind = Var1Scenario{GrangerMode::Power};
  else throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
  return c;
}

Index ardl_sparsity(Index N) { return N < 501 ? 5 : 10; }

Eigen::VectorXd alternating_coefficients(Index length, Index s) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(length);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s));
  for (Index j = 1; j <= std::min(s, length); ++j) beta(j - 1) = (j % 2 == 0 ? scale : -scale);
  return beta;
}

SimulatedData simulate_ardl(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  const auto& scenario = std::get<ArdlScenario>(config.kind);
  const Index d = config.N - 1;
  const Index blocks = d / kArdlBlock;
  const Index T = config.T;
  const Index total = config.burn_in + T + 1;
  const Eigen::VectorXd beta = alternating_coefficients(d, ardl_sparsity(config.N));

  std::normal_distribution<double> normal;
  std::vector<GarchProcess> nu_garch;
  GarchProcess u_garch;
  if (scenario.errors == ErrorLaw::GARCH) nu_garch.assign(static_cast<std::size_t>(d), GarchProcess{});

  // x history: row t holds x_t; rows before the start are zero.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total + 1, d);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(total + 1);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(total + 1);
  Eigen::VectorXd sums1(blocks), sums4(blocks);
  for (Index t = 1; t <= total; ++t) {
    const double eps_u = config.innovation_scale * normal(rng);
    u(t) = scenario.errors == ErrorLaw::GARCH ? u_garch.next(eps_u) : eps_u;
    y(t) = kArdlRho * y(t - 1) + beta.dot(x.row(t - 1)) + u(t);

    for (Index b = 0; b < blocks; ++b) {
      sums1(b) = x.row(t - 1).segment(b * kArdlBlock, kArdlBlock).sum();
      sums4(b) = t >= 4 ? x.row(t - 4).segment(b * kArdlBlock, kArdlBlock).sum() : 0.0;
    }
    for (Index k = 0; k < d; ++k) {
      const double eps = config.innovation_scale * normal(rng);
      const double nu = scenario.errors == ErrorLaw::GARCH
                            ? nu_garch[static_cast<std::size_t>(k)].next(eps)
                            : eps;
      const Index b = k / kArdlBlock;
      x(t, k) = kArdlA1 * sums1(b) + kArdlA4 * sums4(b) + nu;
    }
  }

  const Index first = total - T + 1;  // first retained response index
  Eigen::MatrixXd X(T, config.N);
  X.col(0) = y.segment(first - 1, T);
  X.rightCols(d) = x.middleRows(first - 1, T);
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(config.N));
  names.push_back("y_lag1");
  for (Index k = 1; k <= d; ++k) names.push_back("x" + std::to_string(k) + "_lag1");

  Eigen::VectorXd truth(config.N);
  truth(0) = kArdlRho;
  truth.tail(d) = beta;
  return {Dataset(y.segment(first, T), std::move(X), std::move(names)), std::move(truth),
          u.segment(first, T)};
}

Eigen::VectorXd draw_factor_loadings(Index N, std::uint64_t seed) {
  Rng rng = make_rng(seed, kExperimentStream);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd loadings(N);
  for (Index j = 0; j < N; ++j) loadings(j) = unif(rng);
  return loadings;
}

SimulatedData simulate_factor(const ScenarioConfig& config, const Eigen::VectorXd& loadings,
                              Rng& rng) {
  config.validate();
  if (loadings.size() != config.N)
    throw Error(ErrorCode::DimensionMismatch, "need one loading per regressor");
  const Index N = config.N;
  const Index T = config.T;
  const Eigen::VectorXd beta = alternating_coefficients(N, ardl_sparsity(N) + 1);
  std::normal_distribution<double> normal;

  const double scale = config.innovation_scale;
  double f = 0.0;
  for (int t = 0; t < config.burn_in; ++t) f = kFactorAr * f + scale * normal(rng);

  Eigen::MatrixXd X(T, N);
  Eigen::VectorXd y(T), u(T);
  for (Index t = 0; t < T; ++t) {
    f = kFactorAr * f + scale * normal(rng);
    for (Index j = 0; j < N; ++j) X(t, j) = loadings(j) * f + scale * normal(rng);
    u(t) = scale * normal(rng);
    y(t) = X.row(t).dot(beta) + u(t);
  }
  std::vector<std::string> names;
  for (Index j = 1; j <= N; ++j) names.push_back("x" + std::to_string(j));
  return {Dataset(std::move(y), std::move(X), std::move(names)), beta, std::move(u)};
}

Eigen::MatrixXd var1_coefficients(Index dim, GrangerMode mode, double rho) {
  Eigen::MatrixXd A(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    for (Index k = 0; k < dim; ++k) {
      const Index lag = std::abs(j - k);
      A(j, k) = (lag % 2 == 0 ? 1.0 : -1.0) * std::pow(rho, static_cast<double>(lag + 1));
    }
  }
  if (mode == GrangerMode::Size && dim > 1) A(0, 1) = 0.0;
  return A;
}

VarSimulation simulate_var1(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  const auto& scenario = std::get<Var1Scenario>(config.kind);
  const Index d = config.N / 2;
  const Index T = config.T;
  const Index total = config.burn_in + T + 2;
  const Eigen::MatrixXd A = var1_coefficients(d, scenario.mode);
  std::normal_distribution<double> normal;

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(d, total + 1);  // column t holds z_t
  for (Index t = 1; t <= total; ++t) {
    Eigen::VectorXd shock(d);
    for (Index k = 0; k < d; ++k) shock(k) = config.innovation_scale * normal(rng);
    z.col(t).noalias() = A * z.col(t - 1);
    z.col(t) += shock;
  }

  const Index first = total - T + 1;
  Eigen::MatrixXd X(T, config.N);
  X.leftCols(d) = z.middleCols(first - 1, T).transpose();
  X.rightCols(d) = z.middleCols(first - 2, T).transpose();
  const Eigen::VectorXd y = z.row(0).segment(first, T).transpose();
  Eigen::VectorXd u(T);
  for (Index t = 0; t < T; ++t) u(t) = y(t) - A.row(0).dot(X.row(t).head(d));

  std::vector<std::string> names;
  for (int lag = 1; lag <= 2; ++lag)
    for (Index k = 1; k <= d; ++k)
      names.push_back("z" + std::to_string(k) + "_lag" + std::to_string(lag));

  Eigen::VectorXd truth = Eigen::VectorXd::Zero(config.N);
  truth.head(d) = A.row(0).transpose();

  VarSimulation out{{Dataset(y, std::move(X), std::move(names)), std::move(truth), std::move(u)},
                    {}};
  out.restriction.H = {1, d};
  out.restriction.R = Eigen::MatrixXd::Identity(2, 2);
  out.restriction.q = Eigen::VectorXd::Zero(2);
  return out;
}

std::vector<std::string> default_targets(const ScenarioConfig& config) {
  if (std::holds_alternative<ArdlScenario>(config.kind)) return {"rho", "beta1"};
  if (std::holds_alternative<FactorScenario>(config.kind)) return {"beta1"};
  throw Error(ErrorCode::InvalidArgument, "VAR scenarios have a restriction, not CI targets");
}

std::vector<Index> target_columns(const ScenarioConfig& config,
                                  const std::vector<std::string>& targets) {
  std::vector<Index> cols;
  const bool ardl = std::holds_alternative<ArdlScenario>(config.kind);
  for (const auto& name : targets) {
    if (ardl && name == "rho") {
      cols.push_back(0);
    } else if (name.size() > 4 && name.rfind("beta", 0) == 0) {
      const Index j = std::stol(name.substr(4));
      const Index col = ardl ? j : j - 1;
      if (j < 1 || col >= config.N)
        throw Error(ErrorCode::UnknownColumn, "target '" + name + "' out of range");
      cols.push_back(col);
    } else {
      throw Error(ErrorCode::UnknownColumn, "unknown target '" + name + "' for " + config.name());
    }
  }
  return cols;
}

SimulatedData simulate_replication(const ScenarioConfig& config, int replication) {
  Rng rng = make_rng(config.seed, replication_stream(replication));
  return std::visit(Overloaded{
                        [&](const ArdlScenario&) { return simulate_ardl(config, rng); },
                        [&](const FactorScenario&) {
                          return simulate_factor(config, draw_factor_loadings(config.N, config.seed),
                                                 rng);
                        },
                        [&](const Var1Scenario&) { return simulate_var1(config, rng).sim; },
                    },
                    config.kind);
}

namespace {

bool estimate_converged(const DesparsifiedEstimate& est) {
  if (!est.beta_init.converged) return false;
  for (const auto& fit : est.nodewise.fits)
    if (!fit.converged) return false;
  return true;
}

template <class Fn>
void for_each_replication(const ScenarioConfig& config, const ExperimentOptions& options, Fn fn) {
  std::atomic<int> done{0};
  parallel_for(static_cast<std::size_t>(config.replications), options.threads,
               [&](std::size_t r) {
                 fn(static_cast<int>(r));
                 const int finished = ++done;
                 if (options.progress) options.progress(finished, config.replications);
               });
}

DesparsifyConfig replication_estimator(const ExperimentOptions& options) {
  DesparsifyConfig cfg = options.estimator;
  if (options.threads > 1) cfg.threads = 1;
  return cfg;
}

}  // namespace

std::vector<ReplicationOutcome> run_coverage_replications(
    const ScenarioConfig& config, const std::vector<std::string>& targets,
    const ExperimentOptions& options) {
  config.validate();
  const std::vector<std::string> names = targets.empty() ? default_targets(config) : targets;
  const std::vector<Index> H = target_columns(config, names);
  const DesparsifyConfig estimator = replication_estimator(options);
  Eigen::VectorXd loadings;
  if (std::holds_alternative<FactorScenario>(config.kind))
    loadings = draw_factor_loadings(config.N, config.seed);

  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(config.replications));
  for_each_replication(config, options, [&](int r) {
    ReplicationOutcome& out = outcomes[static_cast<std::size_t>(r)];
    Rng rng = make_rng(config.seed, replication_stream(r));
    const SimulatedData sim = std::holds_alternative<FactorScenario>(config.kind)
                                  ? simulate_factor(config, loadings, rng)
                                  : simulate_ardl(config, rng);
    out.truth = sim.beta_true(H);
    try {
      const Moments moments = compute_moments(sim.data);
      const DesparsifiedEstimate est = desparsified_lasso(sim.data, moments, H, estimator);
      if (!estimate_converged(est)) {
        out.failed = true;
        out.failure = "NonConvergence";
        return;
      }
      const HacEstimate hac = estimate_hac(est, options.bandwidth);
      out.b = est.b_H;
      out.lasso = est.beta_init.beta(H);
      out.se = standard_errors(hac);
      out.z = z_statistics(est, hac, out.truth);
      out.intervals = confidence_intervals(est, hac, options.alpha);
    } catch (const Error& e) {
      if (!e.is_numerical()) throw;
      out.failed = true;
      out.failure = std::string(to_string(e.code()));
    }
  });
  return outcomes;
}

std::vector<CoverageRow> run_coverage_experiment(const ScenarioConfig& config,
                                                 const std::vector<std::string>& targets,
                                                 const ExperimentOptions& options) {
  const std::vector<std::string> names = targets.empty() ? default_targets(config) : targets;
  const auto outcomes = run_coverage_replications(config, names, options);

  std::vector<CoverageRow> rows;
  for (std::size_t i = 0; i < names.size(); ++i) {
    CoverageRow row;
    row.scenario = config.name();
    row.N = config.N;
    row.T = config.T;
    row.parameter = names[i];
    row.replications = config.replications;
    int covered = 0;
    double width = 0.0;
    for (const auto& out : outcomes) {
      if (out.failed) {
        ++row.excluded;
        continue;
      }
      const Interval& ci = out.intervals[i];
      covered += ci.contains(out.truth(static_cast<Index>(i))) ? 1 : 0;
      width += ci.width();
    }
    const int used = row.replications - row.excluded;
    row.coverage = used > 0 ? static_cast<double>(covered) / used : 0.0;
    row.mean_width = used > 0 ? width / used : 0.0;
    rows.push_back(row);
  }
  return rows;
}

RejectionRow run_granger_experiment(const ScenarioConfig& config,
                                    const ExperimentOptions& options) {
  config.validate();
  const auto* scenario = std::get_if<Var1Scenario>(&config.kind);
  if (!scenario) throw Error(ErrorCode::InvalidArgument, "Granger experiment needs a VAR scenario");
  const DesparsifyConfig estimator = replication_estimator(options);
  const double critical = dist::chi_squared_quantile(1.0 - options.alpha, 2);

  std::vector<int> status(static_cast<std::size_t>(config.replications), 0);  // 1 reject, -1 failed
  for_each_replication(config, options, [&](int r) {
    Rng rng = make_rng(config.seed, replication_stream(r));
    const VarSimulation var = simulate_var1(config, rng);
    int& s = status[static_cast<std::size_t>(r)];
    try {
      const Moments moments = compute_moments(var.sim.data);
      const DesparsifiedEstimate est =
          desparsified_lasso(var.sim.data, moments, var.restriction.H, estimator);
      if (!estimate_converged(est)) {
        s = -1;
        return;
      }
      HacEstimate hac = estimate_hac(est, options.bandwidth);
      const WaldResult wald = wald_test(est, hac, var.restriction);
      s = wald.statistic > critical ? 1 : 0;
    } catch (const Error& e) {
      if (!e.is_numerical()) throw;
      s = -1;
    }
  });

  RejectionRow row;
  row.scenario = config.name();
  row.N = config.N;
  row.T = config.T;
  row.mode = scenario->mode == GrangerMode::Size ? "size" : "power";
  row.replications = config.replications;
  int rejections = 0;
  for (int s : status) {
    if (s < 0) ++row.excluded;
    if (s > 0) ++rejections;
  }
  const int used = row.replications - row.excluded;
  row.rate = used > 0 ? static_cast<double>(rejections) / used : 0.0;
  return row;
}

}  // namespace despar
