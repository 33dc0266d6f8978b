#pragma once

#include "despar/dataset.hpp"
#include "despar/rng.hpp"
#include "despar/simulate.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace despar {

/// sum_j |beta_j|^r; r = 0 counts nonzeros.
double weak_sparsity_norm(const Eigen::VectorXd& beta, double r);

/// {j : |beta_j| > lambda}, strict.
std::vector<Index> sparsity_index_set(const Eigen::VectorXd& beta, double lambda);

struct SparsityProfile {
  double r = 0.0;
  double s_r = 0.0;
  std::vector<Index> S_lambda;
  Index cardinality = 0;
};

SparsityProfile sparsity_profile(const Eigen::VectorXd& beta, double r, double lambda);

enum class CompatibilityMethod { Sampled, ExhaustiveSmall };

struct CompatibilityEstimate {
  double value = 0.0;
  CompatibilityMethod method = CompatibilityMethod::Sampled;
  /// Sampled results are only upper estimates of the cone minimum.
  bool heuristic_upper_bound = true;
  /// Smallest eigenvalue of Sigma, a lower reference for the constant.
  double min_eigenvalue = 0.0;
  Eigen::VectorXd minimizer;
};

/// |S| z'Sigma z / ||z_S||_1^2.
double compatibility_ratio(const Eigen::MatrixXd& Sigma, std::span<const Index> S,
                           const Eigen::VectorXd& z);

/// ||z_{S^c}||_1 <= 3 ||z_S||_1 and z_S != 0.
bool in_compatibility_cone(std::span<const Index> S, const Eigen::VectorXd& z);

/// Minimum of compatibility_ratio over the cone. ExhaustiveSmall solves the
/// convex problem in every orthant (N <= 8); Sampled draws `samples` random
/// cone points and refines the best orthants locally. Throws EmptyS.
CompatibilityEstimate compatibility_constant(const Eigen::MatrixXd& Sigma,
                                             std::span<const Index> S,
                                             CompatibilityMethod method,
                                             std::uint64_t seed = kDefaultSeed,
                                             int samples = 100000);

/// max_{jk} |a_jk - b_jk|. Throws DimensionMismatch.
double covariance_closeness(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// Distance of X'X/T from Sigma.
double covariance_closeness(const Dataset& data, const Eigen::MatrixXd& Sigma);

enum class ErrorMetric { L1Estimation, Prediction };

/// ||beta_hat - beta_true||_1.
double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true);
/// ||X (beta_hat - beta_true)||_2^2 / T.
double prediction_error(const Dataset& data, const Eigen::VectorXd& beta_hat,
                        const Eigen::VectorXd& beta_true);

struct DecayRow {
  Index T = 0;
  double median_error = 0.0;
  int replications = 0;
  int excluded = 0;
};

/// Median lasso error (BIC-selected lambda) over replications for each T in
/// T_list; scenario.T is ignored.
std::vector<DecayRow> error_decay_study(const ScenarioConfig& scenario,
                                        std::span<const Index> T_list, ErrorMetric metric,
                                        const ExperimentOptions& options = {});

}  // namespace despar
