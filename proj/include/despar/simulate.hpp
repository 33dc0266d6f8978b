#pragma once

#include "despar/dataset.hpp"
#include "despar/desparsify.hpp"
#include "despar/inference.hpp"
#include "despar/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace despar {

enum class ErrorLaw { IID, GARCH };
enum class GrangerMode { Size, Power };

/// y_t = rho y_{t-1} + beta' x_{t-1} + u_t, x_t = A1 x_{t-1} + A4 x_{t-4} + nu_t.
struct ArdlScenario {
  ErrorLaw errors = ErrorLaw::IID;
};

/// y_t = beta' x_t + u_t, x_t = loadings f_t + nu_t, f_t = 0.5 f_{t-1} + eps_t.
struct FactorScenario {};

/// z_t = A1 z_{t-1} + u_t of dimension N/2; first equation of a VAR(2) fit.
struct Var1Scenario {
  GrangerMode mode = GrangerMode::Size;
};

using ScenarioKind = std::variant<ArdlScenario, FactorScenario, Var1Scenario>;

struct ScenarioConfig {
  ScenarioKind kind;
  Index N = 101;
  Index T = 100;
  int replications = 10000;
  std::uint64_t seed = kDefaultSeed;
  int burn_in = 200;
  /// Multiplies every Gaussian draw; 0 leaves only the deterministic recursion.
  double innovation_scale = 1.0;

  /// ardl-iid, ardl-garch, factor, var-size or var-power.
  std::string name() const;
  /// Throws BadDimension / InvalidArgument before any data is generated.
  void validate() const;

  static ScenarioConfig from_name(const std::string& name, Index N, Index T);
};

struct SimulatedData {
  Dataset data;
  Eigen::VectorXd beta_true;  ///< length N, in regressor order
  Eigen::VectorXd errors;     ///< u_t for the T retained observations
};

/// Number of nonzero exogenous coefficients: 5 below N = 501, else 10.
Index ardl_sparsity(Index N);
/// beta_j = (-1)^j / sqrt(s) for j = 1..s, zero after; length `length`.
Eigen::VectorXd alternating_coefficients(Index length, Index s);

inline constexpr double kArdlRho = 0.6;
inline constexpr double kVarRho = 0.4;

struct GarchParams {
  double omega = 5e-4;
  double alpha = 0.05;  ///< on u_{t-1}^2
  double beta = 0.9;    ///< on h_{t-1}

  double unconditional_variance() const { return omega / (1.0 - alpha - beta); }
};

/// GARCH(1,1) with Gaussian innovations, started at the unconditional
/// variance with u_0 = 0.
class GarchProcess {
 public:
  explicit GarchProcess(GarchParams params = {})
      : params_(params), h_(params.unconditional_variance()) {}

  double next(double eps) {
    h_ = params_.omega + params_.beta * h_ + params_.alpha * u_ * u_;
    u_ = std::sqrt(h_) * eps;
    return u_;
  }
  double variance() const { return h_; }

 private:
  GarchParams params_;
  double h_;
  double u_ = 0.0;
};

/// Regressors are (y_{t-1}, x_{t-1}'), so column 0 carries rho and column 1 beta_1.
SimulatedData simulate_ardl(const ScenarioConfig& config, Rng& rng);

/// Factor loadings, drawn Uniform(0,1) once per experiment from `seed`.
Eigen::VectorXd draw_factor_loadings(Index N, std::uint64_t seed);
SimulatedData simulate_factor(const ScenarioConfig& config, const Eigen::VectorXd& loadings,
                              Rng& rng);

/// A1(j,k) = (-1)^{|j-k|} rho^{|j-k|+1}; in size mode A1(0,1) = 0.
Eigen::MatrixXd var1_coefficients(Index dim, GrangerMode mode, double rho = kVarRho);

struct VarSimulation {
  SimulatedData sim;
  Restriction restriction;  ///< zero restriction on the Granger targets
};

/// y_t = z_{1,t} on (z_{t-1}', z_{t-2}')'. The restriction targets
/// columns {1, N/2} (0-based), R = I_2, q = 0.
VarSimulation simulate_var1(const ScenarioConfig& config, Rng& rng);

struct CoverageRow {
  std::string scenario;
  Index N = 0;
  Index T = 0;
  std::string parameter;
  double coverage = 0.0;
  double mean_width = 0.0;
  int replications = 0;
  int excluded = 0;
};

struct RejectionRow {
  std::string scenario;
  Index N = 0;
  Index T = 0;
  std::string mode;  ///< size or power
  double rate = 0.0;
  int replications = 0;
  int excluded = 0;
};

struct ExperimentOptions {
  DesparsifyConfig estimator;  ///< defaults: BIC over 200 values, cap T/2, BIC nodewise
  double alpha = 0.05;
  std::optional<int> bandwidth;  ///< unset: default_bandwidth(T)
  int threads = 1;
  /// Called after each finished replication with (done, total); may be
  /// invoked from worker threads.
  std::function<void(int, int)> progress;
};

/// What one replication of a coverage experiment produced, per target.
struct ReplicationOutcome {
  bool failed = false;
  std::string failure;
  Eigen::VectorXd b;       ///< desparsified estimates for the targets
  Eigen::VectorXd truth;
  Eigen::VectorXd se;
  Eigen::VectorXd z;       ///< against the true values
  std::vector<Interval> intervals;
  Eigen::VectorXd lasso;   ///< initial lasso coefficients for the targets
};

/// Maps parameter names ("rho", "beta1") to regressor columns.
std::vector<Index> target_columns(const ScenarioConfig& config,
                                  const std::vector<std::string>& targets);
std::vector<std::string> default_targets(const ScenarioConfig& config);

/// Every replication of a coverage experiment, indexed by replication number.
std::vector<ReplicationOutcome> run_coverage_replications(
    const ScenarioConfig& config, const std::vector<std::string>& targets,
    const ExperimentOptions& options = {});

std::vector<CoverageRow> run_coverage_experiment(const ScenarioConfig& config,
                                                 const std::vector<std::string>& targets = {},
                                                 const ExperimentOptions& options = {});

RejectionRow run_granger_experiment(const ScenarioConfig& config,
                                    const ExperimentOptions& options = {});

/// Data for one replication: same stream layout as the experiment runners.
SimulatedData simulate_replication(const ScenarioConfig& config, int replication);

}  // namespace despar
