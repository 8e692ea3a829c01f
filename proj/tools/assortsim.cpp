#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "assort/checks.hpp"
#include "assort/instance_io.hpp"
#include "assort/lp.hpp"
#include "assort/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerification = 4;

using assort::checks::CheckResult;
using nlohmann::json;

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw assort::ConfigError("cannot write " + path.string());
  out << contents;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            long long seed_override, int threads) {
  assort::ExperimentSpec spec = assort::io::load_experiment_spec(config_path);
  if (seed_override >= 0) spec.master_seed = static_cast<std::uint64_t>(seed_override);
  if (threads > 0) spec.threads = threads;
  const assort::ExperimentReport report = assort::run_experiment(spec);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    std::ostringstream csv;
    assort::io::write_runs_csv(csv, report);
    write_file(dir / "runs.csv", csv.str());
  }
  {
    std::ostringstream csv;
    assort::io::write_ratio_csv(csv, report);
    write_file(dir / "ratio_vs_T.csv", csv.str());
  }
  {
    std::ostringstream csv;
    assort::io::write_regret_csv(csv, report);
    write_file(dir / "regret_vs_T.csv", csv.str());
  }
  write_file(dir / "aggregate.json",
             assort::io::report_to_json(report).dump(2) + "\n");

  std::cout << "runs=" << report.runs.size()
            << " cells=" << report.cells.size()
            << " feasibility_violations=" << report.feasibility_violations
            << " cg_iterations_max=" << report.cg_iterations_max << "\n";
  for (const assort::SlopeFit& fit : report.slopes) {
    std::cout << "slope " << fit.class_name << " " << fit.slope << " ("
              << fit.points << " points)\n";
  }
  for (const std::string& failure : report.failures) {
    std::cerr << json{{"error", failure}, {"code", kExitSolver}}.dump() << "\n";
  }
  if (report.feasibility_violations > 0 || !report.failures.empty()) {
    return kExitSolver;
  }
  return kExitOk;
}

assort::ClassTuple class_from_flags(const std::string& family, int n, int k, double r,
                                    int b, int blocks, int per_block) {
  assort::ClassTuple klass;
  klass.name = family;
  klass.num_resources = k;
  klass.utility_bound = r;
  if (family == "cardinality") {
    klass.family = assort::AssortmentFamily::cardinality(n, b);
  } else if (family == "partition") {
    klass.family = assort::AssortmentFamily::partition_matroid(n, blocks, per_block);
  } else {
    throw assort::ConfigError("--family must be cardinality or partition");
  }
  return klass;
}

int cmd_gen_instance(const assort::ClassTuple& klass, long long horizon,
                     std::uint64_t seed, const std::string& out_path) {
  const assort::Instance instance = assort::generate_instance(klass, horizon, seed);
  assort::io::save_instance(instance, out_path);
  std::cout << "wrote " << out_path << " (N=" << instance.num_products
            << " K=" << instance.num_resources << " T=" << instance.horizon << ")\n";
  return kExitOk;
}

int cmd_solve_lp(const std::string& instance_path, const std::string& utilities_path,
                 const std::string& out_path, const std::string& dump_lp_path) {
  const assort::Instance instance = assort::io::load_instance(instance_path);
  assort::UtilityVector v = instance.true_utilities;
  if (!utilities_path.empty()) {
    std::ifstream in(utilities_path);
    if (!in) throw assort::ConfigError("cannot open utilities file: " + utilities_path);
    json j;
    in >> j;
    v = assort::UtilityVector::of(j.get<std::vector<double>>(),
                                  instance.utility_bound);
  }
  assort::lp::SolverOptions options;
  options.keep_master = !dump_lp_path.empty();
  const assort::lp::LPResult result = assort::lp::solve_lp(instance.view(), v, options);

  json out{{"objective", result.objective},
           {"benchmark", result.objective * static_cast<double>(instance.horizon)},
           {"cg_iterations", result.cg_iterations},
           {"status", assort::lp::to_string(result.status)},
           {"degenerate", result.degenerate},
           {"duals", result.duals},
           {"support", assort::io::distribution_to_json(result.distribution)}};
  if (out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    write_file(out_path, out.dump(2) + "\n");
  }
  if (!dump_lp_path.empty() && result.master) {
    std::ofstream lp_out(dump_lp_path);
    assort::lp::write_lp_format(lp_out, *result.master);
  }
  return result.status == assort::lp::SolveStatus::Optimal ? kExitOk : kExitSolver;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, int cap_n,
               long long cap_cases) {
  std::vector<std::string> suites;
  if (suite == "all") {
    suites = {"normalization", "lipschitz",   "mle",     "lp-oracle",
              "pricing-oracle", "feasibility", "coverage"};
  } else {
    suites = {suite};
  }
  bool ok = true;
  for (const std::string& name : suites) {
    const CheckResult result = assort::checks::run_suite(name, seed, cap_n, cap_cases);
    std::printf("%-15s %s cases=%lld violations=%lld worst_slack=%.3g tol=%.3g%s%s\n",
                result.suite.c_str(), result.passed ? "PASS" : "FAIL", result.cases,
                result.violations, result.worst_slack, result.tolerance,
                result.detail.empty() ? "" : " ", result.detail.c_str());
    ok = ok && result.passed;
  }
  return ok ? kExitOk : kExitVerification;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
  assort::ExperimentReport merged;
  for (const std::string& path : inputs) {
    std::ifstream in(path);
    if (!in) throw assort::ConfigError("cannot open runs CSV: " + path);
    assort::ExperimentReport part = assort::io::read_runs_csv(in);
    for (auto& r : part.runs) merged.runs.push_back(std::move(r));
  }
  std::ostringstream csv;
  assort::io::write_runs_csv(csv, merged);
  std::istringstream round_trip(csv.str());
  const assort::ExperimentReport report = assort::io::read_runs_csv(round_trip);
  const json out = assort::io::report_to_json(report);
  if (out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    write_file(out_path, out.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online assortment optimization under an unknown MNL model: "
               "simulation, fluid LP solver and verification suites"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "execute an experiment config");
  std::string config_path, out_dir = "out";
  long long seed_override = -1;
  int threads = 0;
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed_override, "override the config master seed");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");

  // gen-instance
  auto* gen = app.add_subcommand("gen-instance", "generate a random instance");
  std::string family = "cardinality", instance_out = "instance.json";
  int gen_n = 10, gen_k = 5, gen_b = 6, gen_blocks = 2, gen_per_block = 3;
  double gen_r = 3.0;
  long long gen_t = 1000;
  std::uint64_t gen_seed = 1;
  gen->add_option("--family", family, "cardinality | partition");
  gen->add_option("--n", gen_n, "number of products");
  gen->add_option("--k", gen_k, "number of resources");
  gen->add_option("--r-bound", gen_r, "utility bound R");
  gen->add_option("--b", gen_b, "cardinality bound");
  gen->add_option("--blocks", gen_blocks, "partition blocks");
  gen->add_option("--per-block", gen_per_block, "per-block bound");
  gen->add_option("--t", gen_t, "horizon T");
  gen->add_option("--seed", gen_seed, "instance seed");
  gen->add_option("--out", instance_out, "output path");

  // solve-lp
  auto* solve = app.add_subcommand("solve-lp", "solve the fluid LP of an instance");
  std::string instance_path, utilities_path, lp_out, dump_lp;
  solve->add_option("--instance", instance_path, "instance JSON")->required();
  solve->add_option("--utilities", utilities_path,
                    "JSON array overriding the instance utilities");
  solve->add_option("--out", lp_out, "result JSON path (default stdout)");
  solve->add_option("--dump-lp", dump_lp, "write the final restricted master "
                                          "in LP interchange format");

  // verify
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite = "all";
  std::uint64_t verify_seed = 12345;
  int cap_n = 0;
  long long cap_cases = 0;
  verify->add_option("--suite", suite,
                     "normalization | lipschitz | mle | lp-oracle | "
                     "pricing-oracle | feasibility | coverage | all");
  verify->add_option("--seed", verify_seed, "suite seed");
  verify->add_option("--cap-n", cap_n, "product-count cap where applicable");
  verify->add_option("--cap-family-size", cap_cases, "case/size cap where applicable");

  // report
  auto* report = app.add_subcommand("report", "re-aggregate per-run CSVs");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("--inputs", report_inputs, "runs.csv files")->required();
  report->add_option("--out", report_out, "aggregate JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed_override, threads);
    if (gen->parsed()) {
      return cmd_gen_instance(class_from_flags(family, gen_n, gen_k, gen_r, gen_b,
                                               gen_blocks, gen_per_block),
                              gen_t, gen_seed, instance_out);
    }
    if (solve->parsed()) {
      return cmd_solve_lp(instance_path, utilities_path, lp_out, dump_lp);
    }
    if (verify->parsed()) return cmd_verify(suite, verify_seed, cap_n, cap_cases);
    if (report->parsed()) return cmd_report(report_inputs, report_out);
  } catch (const assort::ConfigError& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  } catch (const assort::EnumerationTooLarge& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitSolver}}.dump() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
