// Command-line front end: fit and infer on CSV data, run simulation
// experiments and error-decay studies.

#include "despar/csv.hpp"
#include "despar/desparsify.hpp"
#include "despar/diagnostics.hpp"
#include "despar/error.hpp"
#include "despar/hac.hpp"
#include "despar/inference.hpp"
#include "despar/parallel.hpp"
#include "despar/report.hpp"
#include "despar/simulate.hpp"
#include "despar/solver.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace despar;

constexpr int kExitNumerical = 1;
constexpr int kExitInput = 2;

struct EstimatorFlags {
  std::string lambda = "auto";
  std::string criterion = "bic";
  double ebic_gamma = 1.0;
  int grid_size = 200;
};

struct Options {
  std::optional<int> threads;
  std::string out;

  std::string input;
  EstimatorFlags est;
  bool standardize = false;

  std::vector<std::string> targets;
  double alpha = 0.05;
  std::string bandwidth = "auto";
  std::string restrict_path;

  std::string scenario;
  Index n = 101;
  Index t = 100;
  int reps = 1000;
  std::uint64_t seed = kDefaultSeed;

  std::vector<Index> t_list{250, 500, 1000};
  std::string metric = "l1";
};

Error input_error(const std::string& what) { return Error(ErrorCode::InvalidArgument, what); }

Criterion parse_criterion(const EstimatorFlags& f) {
  if (f.criterion == "aic") return Criterion::aic();
  if (f.criterion == "bic") return Criterion::bic();
  if (f.criterion == "ebic") return Criterion::ebic(f.ebic_gamma);
  throw input_error("unknown criterion '" + f.criterion + "'");
}

std::optional<double> parse_lambda(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !(v >= 0.0)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw input_error("--lambda expects a nonnegative number or 'auto', got '" + text + "'");
  }
}

std::optional<int> parse_bandwidth(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size() || v < 1) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw input_error("--bandwidth expects a positive integer or 'auto', got '" + text + "'");
  }
}

SolverConfig solver_config(const EstimatorFlags& f) {
  SolverConfig c;
  c.grid_size = f.grid_size;
  c.validate();
  return c;
}

Json estimator_json(const EstimatorFlags& f) {
  return Json{{"lambda", f.lambda},
              {"criterion", f.criterion},
              {"ebic_gamma", f.ebic_gamma},
              {"grid_size", f.grid_size}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path);
}

class Run {
 public:
  Run(std::string command, const Options& opt) : opt_(opt), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
  }

  RunManifest& manifest() { return manifest_; }

  void add_input(const std::string& path) {
    manifest_.input_digests.emplace_back(path, sha256_file(path));
  }

  // Writes each (suffix, text) pair under the --out prefix plus one manifest,
  // or the first output to stdout when no prefix is given.
  void emit(const std::vector<std::pair<std::string, std::string>>& outputs) {
    if (opt_.out.empty()) {
      std::cout << outputs.front().second;
      std::cout.flush();
      return;
    }
    for (const auto& [suffix, text] : outputs) write_text(opt_.out + suffix, text);
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text(opt_.out + ".manifest.json", manifest_.to_json().dump(2) + "\n");
  }

 private:
  const Options& opt_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
};

Json ic_table(const std::vector<LassoFit>& path, const Criterion& crit, Index N, Index T) {
  Json rows = Json::array();
  for (const auto& f : path) {
    rows.push_back({{"lambda", f.lambda},
                    {"k", f.support.size()},
                    {"rss", f.rss()},
                    {"ic", information_criterion(crit, f.rss(), static_cast<Index>(f.support.size()), N, T)},
                    {"eligible", f.eligible},
                    {"converged", f.converged}});
  }
  return rows;
}

int cmd_fit(const Options& opt) {
  Run run("fit", opt);
  run.add_input(opt.input);
  const Dataset raw = read_dataset_csv(opt.input);
  const Criterion crit = parse_criterion(opt.est);
  const std::optional<double> lambda = parse_lambda(opt.est.lambda);
  const SolverConfig cfg = solver_config(opt.est);

  std::optional<Standardization> stdz;
  if (opt.standardize) stdz = fit_standardization(raw);
  const Dataset data = stdz ? stdz->apply(raw) : raw;
  const Moments moments = compute_moments(data);
  const LassoProblem problem = LassoProblem::regression(data, moments);

  LassoFit fit;
  Json table = Json::array();
  if (lambda) {
    fit = solve(problem, *lambda, cfg);
  } else {
    std::vector<LassoFit> path = selection_path(problem, cfg);
    table = ic_table(path, crit, data.N(), data.T());
    fit = std::move(path[select_index_by_ic(path, crit, data.N(), data.T())]);
  }

  const Eigen::VectorXd beta = stdz ? stdz->coefficients_to_original(fit.beta) : fit.beta;
  Json coefficients = Json::object();
  Json support = Json::array();
  for (Index j = 0; j < data.N(); ++j) {
    coefficients[raw.name(j)] = beta(j);
    if (fit.beta(j) != 0.0) support.push_back(raw.name(j));
  }

  Json report;
  report["command"] = "fit";
  report["T"] = data.T();
  report["N"] = data.N();
  report["lambda"] = fit.lambda;
  report["lambda_mode"] = lambda ? "fixed" : "auto";
  report["criterion"] = opt.est.criterion;
  report["standardized"] = opt.standardize;
  if (stdz) report["intercept"] = stdz->intercept(beta);
  report["support"] = support;
  report["coefficients"] = coefficients;
  report["objective"] = fit.objective;
  report["iterations"] = fit.iterations;
  report["converged"] = fit.converged;
  report["ic_table"] = table;

  Json config = estimator_json(opt.est);
  config["input"] = opt.input;
  config["standardize"] = opt.standardize;
  run.manifest().config = config;
  run.emit({{".json", report.dump(2) + "\n"}});
  if (!fit.converged) {
    std::cerr << "despar: coordinate descent did not converge\n";
    return kExitNumerical;
  }
  return 0;
}

std::string inference_csv(const InferenceReport& rep, const Dataset& data) {
  std::ostringstream out;
  out << "target,estimate,se,ci_lower,ci_upper,z\n";
  for (std::size_t i = 0; i < rep.H.size(); ++i) {
    const auto k = static_cast<Index>(i);
    out << data.name(rep.H[i]) << ',' << format_double(rep.b_H(k)) << ','
        << format_double(rep.se(k)) << ',' << format_double(rep.ci_lower(k)) << ','
        << format_double(rep.ci_upper(k)) << ',' << format_double(rep.z_stats(k)) << '\n';
  }
  return out.str();
}

int cmd_infer(const Options& opt) {
  Run run("infer", opt);
  run.add_input(opt.input);
  const Dataset data = read_dataset_csv(opt.input);
  if (opt.targets.empty()) throw input_error("--targets is required");

  std::vector<Index> H;
  for (const auto& name : opt.targets) {
    Index found = -1;
    for (Index j = 0; j < data.N(); ++j)
      if (data.name(j) == name) found = j;
    if (found < 0) throw Error(ErrorCode::UnknownColumn, "no column named '" + name + "'");
    H.push_back(found);
  }
  if (!(opt.alpha > 0.0 && opt.alpha <= 1.0)) throw input_error("--alpha must lie in (0, 1]");

  DesparsifyConfig cfg;
  cfg.lambda = parse_lambda(opt.est.lambda);
  cfg.criterion = parse_criterion(opt.est);
  cfg.nodewise.criterion = cfg.criterion;
  cfg.solver = solver_config(opt.est);
  cfg.threads = resolve_threads(opt.threads);
  const std::optional<int> bandwidth = parse_bandwidth(opt.bandwidth);

  std::optional<Restriction> restriction;
  if (!opt.restrict_path.empty()) {
    run.add_input(opt.restrict_path);
    restriction = read_restriction_csv(opt.restrict_path, opt.targets, H);
  }

  const DesparsifiedEstimate est = desparsified_lasso(data, H, cfg);
  HacEstimate hac = estimate_hac(est, bandwidth);
  const InferenceReport rep = make_report(est, hac, opt.alpha, restriction);

  Json targets = Json::array();
  for (std::size_t i = 0; i < H.size(); ++i) {
    const auto k = static_cast<Index>(i);
    targets.push_back({{"name", data.name(H[i])},
                       {"column", H[i]},
                       {"estimate", rep.b_H(k)},
                       {"lasso", est.beta_init.beta(H[i])},
                       {"se", rep.se(k)},
                       {"ci_lower", rep.ci_lower(k)},
                       {"ci_upper", rep.ci_upper(k)},
                       {"z", rep.z_stats(k)},
                       {"nodewise_lambda", est.nodewise.fits[i].lambda_j},
                       {"tau_sq", est.nodewise.fits[i].tau_sq}});
  }
  Json report;
  report["command"] = "infer";
  report["T"] = data.T();
  report["N"] = data.N();
  report["alpha"] = opt.alpha;
  report["bandwidth"] = rep.bandwidth;
  report["lambda"] = est.beta_init.lambda;
  report["targets"] = targets;
  if (rep.wald)
    report["wald"] = {{"statistic", rep.wald->statistic}, {"pvalue", rep.wald->pvalue}, {"P", rep.wald->P}};
  else
    report["wald"] = nullptr;

  Json config = estimator_json(opt.est);
  config["input"] = opt.input;
  config["targets"] = opt.targets;
  config["alpha"] = opt.alpha;
  config["bandwidth"] = opt.bandwidth;
  config["restrict"] = opt.restrict_path;
  run.manifest().config = config;
  run.emit({{".json", report.dump(2) + "\n"}, {".csv", inference_csv(rep, data)}});

  bool converged = est.beta_init.converged;
  for (const auto& f : est.nodewise.fits) converged = converged && f.converged;
  if (!converged) {
    std::cerr << "despar: coordinate descent did not converge\n";
    return kExitNumerical;
  }
  return 0;
}

std::function<void(int, int)> progress_printer(const std::string& label) {
  auto mutex = std::make_shared<std::mutex>();
  return [mutex, label](int done, int total) {
    const int step = std::max(1, total / 20);
    if (done % step != 0 && done != total) return;
    std::lock_guard<std::mutex> lock(*mutex);
    std::cerr << label << ": " << done << "/" << total << " replications\n";
  };
}

int cmd_simulate(const Options& opt) {
  Run run("simulate", opt);
  ScenarioConfig config = ScenarioConfig::from_name(opt.scenario, opt.n, opt.t);
  config.replications = opt.reps;
  config.seed = opt.seed;
  config.validate();

  ExperimentOptions eo;
  eo.estimator.criterion = parse_criterion(opt.est);
  eo.estimator.nodewise.criterion = eo.estimator.criterion;
  eo.estimator.solver = solver_config(opt.est);
  eo.estimator.lambda = parse_lambda(opt.est.lambda);
  eo.alpha = opt.alpha;
  eo.bandwidth = parse_bandwidth(opt.bandwidth);
  eo.threads = resolve_threads(opt.threads);
  eo.progress = progress_printer(config.name());

  std::vector<CoverageRow> coverage;
  std::vector<RejectionRow> rejection;
  if (std::holds_alternative<Var1Scenario>(config.kind))
    rejection.push_back(run_granger_experiment(config, eo));
  else
    coverage = run_coverage_experiment(config, opt.targets, eo);

  std::ostringstream csv;
  write_table_csv(csv, coverage, rejection);

  Json cfg = estimator_json(opt.est);
  cfg["scenario"] = config.name();
  cfg["N"] = config.N;
  cfg["T"] = config.T;
  cfg["replications"] = config.replications;
  cfg["burn_in"] = config.burn_in;
  cfg["alpha"] = opt.alpha;
  cfg["bandwidth"] = opt.bandwidth;
  cfg["targets"] = opt.targets;
  run.manifest().config = cfg;
  run.manifest().seed = config.seed;
  run.emit({{".csv", csv.str()}, {".json", table_json(coverage, rejection).dump(2) + "\n"}});
  return 0;
}

int cmd_decay(const Options& opt) {
  Run run("decay", opt);
  ScenarioConfig config = ScenarioConfig::from_name(opt.scenario, opt.n, opt.t_list.front());
  config.replications = opt.reps;
  config.seed = opt.seed;
  ErrorMetric metric;
  if (opt.metric == "l1") metric = ErrorMetric::L1Estimation;
  else if (opt.metric == "prediction") metric = ErrorMetric::Prediction;
  else throw input_error("--metric expects l1 or prediction");

  ExperimentOptions eo;
  eo.estimator.criterion = parse_criterion(opt.est);
  eo.estimator.solver = solver_config(opt.est);
  eo.threads = resolve_threads(opt.threads);
  const auto rows = error_decay_study(config, opt.t_list, metric, eo);

  std::ostringstream csv;
  write_decay_csv(csv, config.name(), metric, rows);
  Json cfg = estimator_json(opt.est);
  cfg["scenario"] = config.name();
  cfg["N"] = config.N;
  cfg["T_list"] = opt.t_list;
  cfg["replications"] = config.replications;
  cfg["metric"] = opt.metric;
  run.manifest().config = cfg;
  run.manifest().seed = config.seed;
  run.emit({{".csv", csv.str()}});
  return 0;
}

void add_estimator_flags(CLI::App* app, EstimatorFlags& f) {
  app->add_option("--lambda", f.lambda, "penalty value or 'auto' for IC selection")->capture_default_str();
  app->add_option("--criterion", f.criterion, "aic, bic or ebic")
      ->check(CLI::IsMember({"aic", "bic", "ebic"}))
      ->capture_default_str();
  app->add_option("--ebic-gamma", f.ebic_gamma, "EBIC gamma")->capture_default_str();
  app->add_option("--grid-size", f.grid_size, "number of penalty values on the path")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Desparsified lasso inference for high-dimensional time series"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.add_option("--threads", opt.threads, "worker threads (default: DESPAR_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", opt.out, "output path prefix; stdout when omitted");

  auto* fit = app.add_subcommand("fit", "lasso fit on a CSV file (first column is the response)");
  fit->add_option("input", opt.input, "CSV file")->required();
  add_estimator_flags(fit, opt.est);
  fit->add_flag("--standardize", opt.standardize, "center and scale before fitting");

  auto* infer = app.add_subcommand("infer", "desparsified lasso intervals and Wald test");
  infer->add_option("input", opt.input, "CSV file")->required();
  add_estimator_flags(infer, opt.est);
  infer->add_option("--targets", opt.targets, "column names to infer on")->delimiter(',')->required();
  infer->add_option("--alpha", opt.alpha, "interval level")->capture_default_str();
  infer->add_option("--bandwidth", opt.bandwidth, "HAC bandwidth or 'auto'")->capture_default_str();
  infer->add_option("--restrict", opt.restrict_path, "CSV with restriction rows (target columns and q)");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage or Granger experiment");
  sim->add_option("--scenario", opt.scenario, "ardl-iid, ardl-garch, factor, var-size or var-power")
      ->required()
      ->check(CLI::IsMember({"ardl-iid", "ardl-garch", "factor", "var-size", "var-power"}));
  sim->add_option("--n", opt.n, "number of regressors")->capture_default_str();
  sim->add_option("--t", opt.t, "sample size")->capture_default_str();
  sim->add_option("--reps", opt.reps, "replications")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--seed", opt.seed, "master seed")->capture_default_str();
  sim->add_option("--targets", opt.targets, "parameters for coverage (rho, beta1, ...)")->delimiter(',');
  sim->add_option("--alpha", opt.alpha, "interval / test level")->capture_default_str();
  sim->add_option("--bandwidth", opt.bandwidth, "HAC bandwidth or 'auto'")->capture_default_str();
  add_estimator_flags(sim, opt.est);

  auto* decay = app.add_subcommand("decay", "median lasso error across sample sizes");
  decay->add_option("--scenario", opt.scenario, "simulation scenario")
      ->required()
      ->check(CLI::IsMember({"ardl-iid", "ardl-garch", "factor"}));
  decay->add_option("--n", opt.n, "number of regressors")->capture_default_str();
  decay->add_option("--t-list", opt.t_list, "increasing sample sizes")->delimiter(',')->capture_default_str();
  decay->add_option("--reps", opt.reps, "replications per sample size")->check(CLI::PositiveNumber)->capture_default_str();
  decay->add_option("--seed", opt.seed, "master seed")->capture_default_str();
  decay->add_option("--metric", opt.metric, "l1 or prediction")->capture_default_str();
  decay->add_option("--criterion", opt.est.criterion, "aic, bic or ebic")
      ->check(CLI::IsMember({"aic", "bic", "ebic"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*fit) return cmd_fit(opt);
    if (*infer) return cmd_infer(opt);
    if (*sim) return cmd_simulate(opt);
    if (*decay) return cmd_decay(opt);
  } catch (const Error& e) {
    std::cerr << "despar: " << e.what() << "\n";
    return e.is_numerical() ? kExitNumerical : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "despar: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
