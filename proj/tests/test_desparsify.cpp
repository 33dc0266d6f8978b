#include <doctest.h>

#include "despar/desparsify.hpp"
#include "despar/error.hpp"
#include "despar/simulate.hpp"
#include "support/oracles.hpp"

using namespace despar;

namespace {

Dataset sparse_data(Index T, Index N, std::mt19937_64& rng) {
  Eigen::MatrixXd X = oracles::gaussian(T, N, rng);
  for (Index j = 1; j < N; ++j) X.col(j) += 0.3 * X.col(j - 1);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(N);
  beta.head(3) << 1.0, -0.5, 0.25;
  return Dataset(X * beta + oracles::gaussian_vector(T, rng), X);
}

DesparsifyConfig exact_inverse(std::optional<double> lambda) {
  DesparsifyConfig cfg;
  cfg.lambda = lambda;
  cfg.nodewise.lambda = 0.0;
  return cfg;
}

}  // namespace

TEST_SUITE("desparsify") {

TEST_CASE("unpenalized fits reproduce least squares") {
  std::mt19937_64 rng(1);
  const Dataset d = sparse_data(70, 12, rng);
  const std::vector<Index> H{0, 5, 11};
  const DesparsifiedEstimate est = desparsified_lasso(d, H, exact_inverse(0.0));
  const Eigen::VectorXd ref = oracles::ols(d.X(), d.y());
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(est.b_H(i) - ref(H[static_cast<std::size_t>(i)])) < 1e-8);
}

TEST_CASE("exact nodewise inverse gives least squares for any penalty") {
  std::mt19937_64 rng(2);
  const Dataset d = sparse_data(70, 12, rng);
  const std::vector<Index> H{1, 2};
  const Eigen::VectorXd ref = oracles::ols(d.X(), d.y());
  for (std::optional<double> lam : {std::optional<double>(0.05), std::optional<double>(0.4),
                                    std::optional<double>()}) {
    const DesparsifiedEstimate est = desparsified_lasso(d, H, exact_inverse(lam));
    CHECK(std::abs(est.b_H(0) - ref(1)) < 1e-8);
    CHECK(std::abs(est.b_H(1) - ref(2)) < 1e-8);
  }
}

TEST_CASE("estimate recomputes from stored parts") {
  std::mt19937_64 rng(3);
  const Dataset d = sparse_data(60, 40, rng);
  const std::vector<Index> H{0, 3};
  const DesparsifiedEstimate est = desparsified_lasso(d, H);
  const Eigen::VectorXd again = recompute_b(est, d);
  for (Index i = 0; i < 2; ++i)
    CHECK(std::abs(again(i) - est.b_H(i)) <= 1e-10 * std::max(1.0, std::abs(est.b_H(i))));
  // Direct evaluation of the correction with the raw design.
  const Eigen::VectorXd u = d.y() - d.X() * est.beta_init.beta;
  for (Index i = 0; i < 2; ++i) {
    const Index j = H[static_cast<std::size_t>(i)];
    const double direct =
        est.beta_init.beta(j) + est.nodewise.theta_rows.row(i).dot(d.X().transpose() * u) / 60.0;
    CHECK(direct == doctest::Approx(est.b_H(i)).epsilon(1e-10));
  }
}

TEST_CASE("permuting the targets permutes the estimates") {
  std::mt19937_64 rng(4);
  const Dataset d = sparse_data(60, 30, rng);
  const std::vector<Index> H{0, 7, 2}, P{2, 0, 7};
  const DesparsifiedEstimate a = desparsified_lasso(d, H), b = desparsified_lasso(d, P);
  CHECK(a.b_H(0) == b.b_H(1));
  CHECK(a.b_H(1) == b.b_H(2));
  CHECK(a.b_H(2) == b.b_H(0));
}

TEST_CASE("target validation") {
  std::mt19937_64 rng(5);
  const Dataset d = sparse_data(30, 5, rng);
  const std::vector<Index> empty{}, bad{7};
  try {
    desparsified_lasso(d, empty);
    FAIL("expected EmptyH");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyH);
  }
  CHECK_THROWS_AS(desparsified_lasso(d, bad), Error);
}

TEST_CASE("bias term") {
  std::mt19937_64 rng(6);
  const Dataset d = sparse_data(60, 10, rng);
  const std::vector<Index> H{0, 1};
  const DesparsifiedEstimate est = desparsified_lasso(d, H);
  CHECK(oracle::delta_bias(est, est.beta_init.beta, d).isZero(0.0));

  const DesparsifiedEstimate exact = desparsified_lasso(d, H, exact_inverse(0.2));
  const Eigen::VectorXd truth = Eigen::VectorXd::LinSpaced(10, -1.0, 1.0);
  CHECK(oracle::delta_bias(exact, truth, d).cwiseAbs().maxCoeff() < 1e-8);

  // Independent evaluation of sqrt(T) (e_j' - Theta_j Sigma_hat)(beta_hat - beta_true).
  const Eigen::MatrixXd sigma = d.X().transpose() * d.X() / 60.0;
  const Eigen::VectorXd diff = est.beta_init.beta - truth;
  const Eigen::VectorXd delta = oracle::delta_bias(est, truth, d);
  for (Index i = 0; i < 2; ++i) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(10);
    e(H[static_cast<std::size_t>(i)]) = 1.0;
    const double ref = std::sqrt(60.0) * (e - est.nodewise.theta_rows.row(i) * sigma).dot(diff);
    CHECK(delta(i) == doctest::Approx(ref).epsilon(1e-10));
  }
  CHECK_THROWS_AS(oracle::delta_bias(est, Eigen::VectorXd::Zero(3), d), Error);
}

TEST_CASE("debiasing moves active coefficients toward the truth") {
  auto cfg = ScenarioConfig::from_name("ardl-iid", 101, 200);
  cfg.seed = 99;
  const std::vector<Index> H{1};
  int closer = 0;
  for (int r = 0; r < 100; ++r) {
    const SimulatedData sim = simulate_replication(cfg, r);
    const DesparsifiedEstimate est = desparsified_lasso(sim.data, H);
    closer += std::abs(est.b_H(0) - sim.beta_true(1)) < std::abs(est.beta_init.beta(1) - sim.beta_true(1));
  }
  MESSAGE("replications with b closer than the lasso: " << closer);
  CHECK(closer > 50);
}

TEST_CASE("bias term shrinks with the sample size") {
  std::vector<double> medians;
  for (Index T : {250, 500, 1000}) {
    auto cfg = ScenarioConfig::from_name("ardl-iid", 101, T);
    cfg.seed = 7;
    const std::vector<Index> H{0, 1};
    std::vector<double> worst;
    for (int r = 0; r < 100; ++r) {
      const SimulatedData sim = simulate_replication(cfg, r);
      const DesparsifiedEstimate est = desparsified_lasso(sim.data, H);
      worst.push_back(oracle::delta_bias(est, sim.beta_true, sim.data).cwiseAbs().maxCoeff());
    }
    std::nth_element(worst.begin(), worst.begin() + 50, worst.end());
    medians.push_back(worst[50]);
  }
  MESSAGE("median max|Delta|: " << medians[0] << " " << medians[1] << " " << medians[2]);
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

}
