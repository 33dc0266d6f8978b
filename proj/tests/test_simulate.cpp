#include <doctest.h>

#include "despar/error.hpp"
#include "despar/nodewise.hpp"
#include "despar/simulate.hpp"

#include <Eigen/Eigenvalues>

using namespace despar;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("coefficient patterns") {
  const Eigen::VectorXd b = alternating_coefficients(100, 5);
  CHECK(b(0) == doctest::Approx(-0.4472135955));
  CHECK(b(1) == doctest::Approx(0.4472135955));
  CHECK(b(4) == doctest::Approx(-0.4472135955));
  CHECK(b.tail(95).isZero(0.0));
  CHECK(ardl_sparsity(101) == 5);
  CHECK(ardl_sparsity(201) == 5);
  CHECK(ardl_sparsity(501) == 10);
  CHECK(ardl_sparsity(1001) == 10);

  auto factor = ScenarioConfig::from_name("factor", 101, 50);
  const SimulatedData f = simulate_replication(factor, 0);
  CHECK((f.beta_true.array() != 0.0).count() == 6);

  auto ardl = ScenarioConfig::from_name("ardl-iid", 101, 50);
  const SimulatedData a = simulate_replication(ardl, 0);
  CHECK(a.beta_true(0) == 0.6);
  CHECK(a.beta_true(1) == doctest::Approx(-1.0 / std::sqrt(5.0)));
  CHECK((a.beta_true.array() != 0.0).count() == 6);
}

TEST_CASE("VAR coefficients") {
  const Eigen::MatrixXd size = var1_coefficients(51, GrangerMode::Size);
  const Eigen::MatrixXd power = var1_coefficients(51, GrangerMode::Power);
  CHECK(size(0, 0) == doctest::Approx(0.4));
  CHECK(size(0, 2) == doctest::Approx(0.064));
  CHECK(size(0, 1) == 0.0);
  CHECK(power(0, 1) == doctest::Approx(-0.16));
  CHECK(power(1, 0) == doctest::Approx(-0.16));
  for (Index dim : {51, 101, 251, 501}) {
    for (GrangerMode mode : {GrangerMode::Size, GrangerMode::Power}) {
      Eigen::EigenSolver<Eigen::MatrixXd> eig(var1_coefficients(dim, mode), false);
      CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("dimension checks happen before generation") {
  CHECK(code_of([] { ScenarioConfig::from_name("ardl-iid", 102, 100).validate(); }) == ErrorCode::BadDimension);
  CHECK(code_of([] { ScenarioConfig::from_name("var-size", 101, 100).validate(); }) == ErrorCode::BadDimension);
  CHECK(code_of([] { ScenarioConfig::from_name("factor", 1, 100).validate(); }) == ErrorCode::BadDimension);
  CHECK(code_of([] { ScenarioConfig::from_name("nope", 10, 100); }) == ErrorCode::InvalidArgument);
  auto c = ScenarioConfig::from_name("ardl-iid", 102, 100);
  CHECK(code_of([&] { run_coverage_experiment(c); }) == ErrorCode::BadDimension);
  CHECK(ScenarioConfig::from_name("var-power", 102, 100).name() == "var-power");
}

TEST_CASE("zero innovations give a zero series") {
  for (const char* name : {"ardl-iid", "ardl-garch", "factor", "var-size"}) {
    auto c = ScenarioConfig::from_name(name, name[0] == 'v' ? 20 : 21, 40);
    c.innovation_scale = 0.0;
    const SimulatedData s = simulate_replication(c, 3);
    CHECK(s.data.y().isZero(0.0));
    CHECK(s.data.X().isZero(0.0));
  }
}

TEST_CASE("ARDL layout") {
  auto c = ScenarioConfig::from_name("ardl-iid", 21, 60);
  const SimulatedData s = simulate_replication(c, 0);
  const auto& X = s.data.X();
  for (Index t = 1; t < 60; ++t) CHECK(X(t, 0) == s.data.y()(t - 1));
  const Eigen::VectorXd resid = s.data.y() - X * s.beta_true - s.errors;
  CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.data.name(0) == "y_lag1");
  CHECK(s.data.name(1) == "x1_lag1");
}

TEST_CASE("GARCH process") {
  GarchProcess g;
  CHECK(g.variance() == doctest::Approx(0.01));
  const double u = g.next(1.0);
  CHECK(g.variance() == doctest::Approx(5e-4 + 0.9 * 0.01));
  CHECK(u == doctest::Approx(std::sqrt(5e-4 + 0.9 * 0.01)));
  g.next(0.0);
  CHECK(g.variance() == doctest::Approx(5e-4 + 0.9 * (5e-4 + 0.9 * 0.01) + 0.05 * u * u));

  auto c = ScenarioConfig::from_name("ardl-garch", 21, 20000);
  const SimulatedData s = simulate_replication(c, 0);
  const double var = s.errors.squaredNorm() / 20000.0;
  CHECK(var == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("factor process") {
  // Unit loadings: lag-1 over lag-0 cross covariance of distinct columns is the factor's AR coefficient.
  auto c = ScenarioConfig::from_name("factor", 10, 100000);
  Rng rng = make_rng(5, 1);
  const SimulatedData s = simulate_factor(c, Eigen::VectorXd::Ones(10), rng);
  const auto& X = s.data.X();
  double lag0 = 0.0, lag1 = 0.0;
  for (Index t = 1; t < X.rows(); ++t) {
    const double sum_t = X.row(t).sum(), sum_p = X.row(t - 1).sum();
    lag0 += sum_t * sum_t - X.row(t).squaredNorm();
    lag1 += sum_t * sum_p - X.row(t).dot(X.row(t - 1));
  }
  CHECK(std::abs(lag1 / lag0 - 0.5) < 0.02);

  // Zero loadings leave IID noise columns.
  Rng rng2 = make_rng(5, 2);
  const SimulatedData n = simulate_factor(ScenarioConfig::from_name("factor", 10, 20000),
                                          Eigen::VectorXd::Zero(10), rng2);
  const Eigen::MatrixXd sigma = n.data.X().transpose() * n.data.X() / 20000.0;
  CHECK((sigma - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 0.05);
  CHECK(population_nodewise(Eigen::MatrixXd::Identity(10, 10), 0).gamma.isZero(0.0));

  const Eigen::VectorXd l = draw_factor_loadings(50, 11);
  CHECK(l.minCoeff() >= 0.0);
  CHECK(l.maxCoeff() <= 1.0);
  CHECK(l == draw_factor_loadings(50, 11));
}

TEST_CASE("VAR layout") {
  auto c = ScenarioConfig::from_name("var-power", 20, 80);
  Rng rng = make_rng(1, 1);
  const VarSimulation v = simulate_var1(c, rng);
  const auto& X = v.sim.data.X();
  CHECK(v.restriction.H == std::vector<Index>{1, 10});
  CHECK(v.restriction.R == Eigen::MatrixXd::Identity(2, 2));
  CHECK(v.restriction.q.isZero(0.0));
  for (Index t = 1; t < 80; ++t) {
    CHECK(X(t, 0) == v.sim.data.y()(t - 1));
    CHECK(X.row(t).tail(10) == X.row(t - 1).head(10));
  }
  const Eigen::VectorXd resid = v.sim.data.y() - X * v.sim.beta_true - v.sim.errors;
  CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(v.sim.beta_true(1) == doctest::Approx(-0.16));
}

TEST_CASE("generated series are stationary") {
  for (const char* name : {"ardl-iid", "ardl-garch", "var-power"}) {
    auto c = ScenarioConfig::from_name(name, name[0] == 'v' ? 20 : 21, 20000);
    const SimulatedData a = simulate_replication(c, 0);
    c.burn_in = 400;
    const SimulatedData b = simulate_replication(c, 0);
    const double scale = std::sqrt(a.errors.squaredNorm() / 20000.0);
    CHECK(std::abs(a.data.y().mean()) < 0.1 * scale * 3.0);
    const double va = a.data.y().squaredNorm() / 20000.0, vb = b.data.y().squaredNorm() / 20000.0;
    CHECK(va / vb == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("replications are reproducible and independent of threads") {
  auto c = ScenarioConfig::from_name("ardl-iid", 21, 60);
  c.replications = 12;
  c.seed = 42;
  const SimulatedData a = simulate_replication(c, 4), b = simulate_replication(c, 4),
                      other = simulate_replication(c, 5);
  CHECK(a.data.y() == b.data.y());
  CHECK(a.data.y() != other.data.y());

  ExperimentOptions one, three;
  three.threads = 3;
  const auto r1 = run_coverage_experiment(c, {}, one);
  const auto r3 = run_coverage_experiment(c, {}, three);
  REQUIRE(r1.size() == 2);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].coverage == r3[i].coverage);
    CHECK(r1[i].mean_width == r3[i].mean_width);
  }
  CHECK(r1[0].parameter == "rho");
  CHECK(r1[1].parameter == "beta1");
  CHECK(r1[0].replications == 12);
  CHECK(r1[0].excluded == 0);

  int calls = 0;
  ExperimentOptions counted;
  counted.progress = [&](int done, int total) {
    ++calls;
    CHECK(done <= total);
  };
  run_coverage_experiment(c, {"rho"}, counted);
  CHECK(calls == 12);
}

TEST_CASE("target names") {
  const auto ardl = ScenarioConfig::from_name("ardl-iid", 101, 100);
  CHECK(target_columns(ardl, {"rho", "beta1", "beta3"}) == std::vector<Index>{0, 1, 3});
  const auto factor = ScenarioConfig::from_name("factor", 101, 100);
  CHECK(target_columns(factor, {"beta1", "beta6"}) == std::vector<Index>{0, 5});
  CHECK(code_of([&] { target_columns(factor, {"rho"}); }) == ErrorCode::UnknownColumn);
  CHECK(code_of([&] { target_columns(ardl, {"beta101"}); }) == ErrorCode::UnknownColumn);
}

TEST_CASE("coverage replication outcomes") {
  auto c = ScenarioConfig::from_name("factor", 21, 80);
  c.replications = 5;
  const auto out = run_coverage_replications(c, {"beta1"});
  REQUIRE(out.size() == 5);
  for (const auto& o : out) {
    REQUIRE(!o.failed);
    CHECK(o.truth(0) == doctest::Approx(-1.0 / std::sqrt(6.0)));
    CHECK(o.intervals[0].lower <= o.intervals[0].upper);
    CHECK(o.z(0) == doctest::Approx((o.b(0) - o.truth(0)) / o.se(0)));
  }
}

TEST_CASE("Granger test size in a friendly configuration") {
  auto c = ScenarioConfig::from_name("var-size", 10, 2000);
  c.replications = 1000;
  const RejectionRow row = run_granger_experiment(c);
  MESSAGE("rejection rate " << row.rate);
  CHECK(row.mode == "size");
  CHECK(row.excluded == 0);
  CHECK(row.rate >= 0.03);
  CHECK(row.rate <= 0.09);
}

}
