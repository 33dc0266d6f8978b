#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "despar/csv.hpp"
#include "despar/desparsify.hpp"
#include "despar/hac.hpp"
#include "despar/inference.hpp"
#include "despar/report.hpp"
#include "despar/simulate.hpp"
#include "despar/solver.hpp"
#include "support/oracles.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

using namespace despar;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("despar_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DESPAR_CLI) + " " + args + " 2>" +
                          (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load_json(const fs::path& p) { return Json::parse(slurp(p)); }

fs::path write_csv(const std::string& file, const Dataset& data) {
  const fs::path p = scratch() / file;
  std::ofstream out(p);
  out << "y";
  for (Index j = 0; j < data.N(); ++j) out << ',' << data.name(j);
  out << '\n';
  for (Index t = 0; t < data.T(); ++t) {
    out << format_double(data.y()(t));
    for (Index j = 0; j < data.N(); ++j) out << ',' << format_double(data.X()(t, j));
    out << '\n';
  }
  return p;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("fit with zero penalty recovers an exact linear relation") {
  const fs::path p = scratch() / "toy.csv";
  std::ofstream(p) << "y,x1,x2\n1,1,0\n2,2,1\n3,3,0\n4,4,1\n";
  const fs::path out = scratch() / "toy";
  REQUIRE(run_cli("--out " + quoted(out) + " fit " + quoted(p) + " --lambda 0") == 0);
  const Json j = load_json(out.string() + ".json");
  CHECK(j["coefficients"]["x1"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(j["coefficients"]["x2"].get<double>()) < 1e-12);
  const Json m = load_json(out.string() + ".manifest.json");
  CHECK(m["command"] == "fit");
  CHECK(m["inputs"].size() == 1);
}

TEST_CASE("input errors exit with status 2") {
  const fs::path nohdr = scratch() / "nohdr.csv";
  std::ofstream(nohdr) << "1,1\n2,2\n3,3\n";
  CHECK(run_cli("fit " + quoted(nohdr) + " > /dev/null") == 2);
  CHECK(slurp(scratch() / "stderr.txt").find("header") != std::string::npos);

  const fs::path toy = scratch() / "toy2.csv";
  std::ofstream(toy) << "y,a,b\n1,1,0\n2,2,1\n3,3,0\n4,4,2\n5,1,1\n";
  CHECK(run_cli("infer " + quoted(toy) + " --targets a,zz > /dev/null") == 2);
  CHECK(slurp(scratch() / "stderr.txt").find("UnknownColumn") != std::string::npos);

  CHECK(run_cli("fit " + quoted(toy) + " --lambda -1 > /dev/null") == 2);
  CHECK(run_cli("fit " + quoted(toy) + " --criterion hqc > /dev/null") == 2);
  CHECK(run_cli("simulate --scenario nope > /dev/null") == 2);
  CHECK(run_cli("> /dev/null") == 2);
}

TEST_CASE("automatic penalty matches the library selection") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd X = oracles::gaussian(200, 50, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(50);
  beta.head(4) << 1.0, -0.8, 0.6, 0.4;
  const Eigen::VectorXd y = X * beta + oracles::gaussian(200, 1, rng).col(0);
  const Dataset data(y, X);
  const fs::path csv = write_csv("auto.csv", data);
  const Dataset parsed = read_dataset_csv(csv.string());

  const Moments mom = compute_moments(parsed);
  const auto problem = LassoProblem::regression(parsed, mom);
  const auto path = selection_path(problem, SolverConfig{});
  const auto k = select_index_by_ic(path, Criterion::bic(), parsed.N(), parsed.T());

  const fs::path out = scratch() / "auto";
  REQUIRE(run_cli("--out " + quoted(out) + " fit " + quoted(csv) + " --lambda auto") == 0);
  const Json j = load_json(out.string() + ".json");
  CHECK(j["lambda"].get<double>() == path[k].lambda);
  CHECK(j["ic_table"].size() == path.size());
  for (Index c = 0; c < parsed.N(); ++c)
    CHECK(j["coefficients"][parsed.name(c)].get<double>() == path[k].beta(c));
}

TEST_CASE("infer reports the library intervals and bandwidth") {
  const ScenarioConfig config = ScenarioConfig::from_name("ardl-iid", 21, 500);
  const SimulatedData sim = simulate_replication(config, 0);
  const fs::path csv = write_csv("ardl_data.csv", sim.data);
  const Dataset parsed = read_dataset_csv(csv.string());
  const std::string t0 = parsed.name(0), t1 = parsed.name(1);

  const fs::path out = scratch() / "infer";
  REQUIRE(run_cli("--out " + quoted(out) + " infer " + quoted(csv) + " --targets " + t0 + "," + t1) == 0);
  const Json j = load_json(out.string() + ".json");
  CHECK(j["bandwidth"] == 2);
  CHECK(j["wald"].is_null());

  const std::vector<Index> H{0, 1};
  const auto est = desparsified_lasso(parsed, H, DesparsifyConfig{});
  HacEstimate hac = estimate_hac(est);
  const auto rep = make_report(est, hac, 0.05, std::nullopt);
  for (Index i = 0; i < 2; ++i) {
    const Json& row = j["targets"][static_cast<std::size_t>(i)];
    CHECK(row["estimate"].get<double>() == rep.b_H(i));
    CHECK(row["ci_lower"].get<double>() == rep.ci_lower(i));
    CHECK(row["ci_upper"].get<double>() == rep.ci_upper(i));
  }
  const std::string table = slurp(out.string() + ".csv");
  CHECK(table.rfind("target,estimate,se,ci_lower,ci_upper,z\n", 0) == 0);

  // restricting the first target to its own estimate gives a zero statistic
  const fs::path rfile = scratch() / "restrict.csv";
  std::ofstream(rfile) << t0 << ',' << t1 << ",q\n1,0," << format_double(rep.b_H(0)) << '\n';
  const fs::path out2 = scratch() / "infer_r";
  REQUIRE(run_cli("--out " + quoted(out2) + " infer " + quoted(csv) + " --targets " + t0 + "," + t1 +
                  " --restrict " + quoted(rfile)) == 0);
  const Json w = load_json(out2.string() + ".json")["wald"];
  CHECK(w["statistic"].get<double>() == 0.0);
  CHECK(w["P"] == 1);
  CHECK(w["pvalue"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("simulate output is reproducible for a fixed seed") {
  const fs::path a = scratch() / "sim_a", b = scratch() / "sim_b";
  const std::string args = " simulate --scenario ardl-iid --reps 1 --seed 7";
  REQUIRE(run_cli("--out " + quoted(a) + args) == 0);
  REQUIRE(run_cli("--out " + quoted(b) + " --threads 2" + args) == 0);
  CHECK(slurp(a.string() + ".csv") == slurp(b.string() + ".csv"));
  CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
  CHECK(load_json(a.string() + ".manifest.json")["seed"] == 7);
}

TEST_CASE("decay writes one row per sample size") {
  const fs::path out = scratch() / "decay";
  REQUIRE(run_cli("--out " + quoted(out) + " decay --scenario ardl-iid --n 21 --t-list 50,100 --reps 3") == 0);
  std::istringstream in(slurp(out.string() + ".csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
