#include "assort/instance_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace assort::io {

using nlohmann::json;

nlohmann::json family_to_json(const AssortmentFamily& family) {
  json j;
  switch (family.kind()) {
    case FamilyKind::Cardinality:
      j["kind"] = "cardinality";
      j["max_size"] = family.max_assortment_size();
      break;
    case FamilyKind::PartitionMatroid:
      j["kind"] = "partition_matroid";
      j["blocks"] = family.blocks();
      j["per_block"] = family.per_block();
      break;
    case FamilyKind::ExplicitList: {
      j["kind"] = "explicit";
      json members = json::array();
      for (const Assortment& s : family.explicit_members()) {
        members.push_back(s.items());
      }
      j["members"] = std::move(members);
      break;
    }
  }
  return j;
}

namespace {

AssortmentFamily family_from_json_n(const json& j, int num_products) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "cardinality") {
    return AssortmentFamily::cardinality(num_products, j.at("max_size").get<int>());
  }
  if (kind == "partition_matroid") {
    return AssortmentFamily::partition_matroid(num_products, j.at("blocks").get<int>(),
                                               j.at("per_block").get<int>());
  }
  if (kind == "explicit") {
    std::vector<Assortment> members;
    for (const json& m : j.at("members")) {
      members.push_back(Assortment::of(m.get<std::vector<int>>()));
    }
    return AssortmentFamily::explicit_list(num_products, std::move(members));
  }
  throw ConfigError("family.kind must be cardinality, partition_matroid or explicit");
}

}  // namespace

AssortmentFamily family_from_json(const json& j) {
  if (!j.contains("N")) {
    throw ConfigError("standalone family document requires an N field");
  }
  return family_from_json_n(j, j.at("N").get<int>());
}

nlohmann::json instance_to_json(const Instance& instance) {
  json j;
  j["N"] = instance.num_products;
  j["K"] = instance.num_resources;
  j["T"] = instance.horizon;
  j["R"] = instance.utility_bound;
  j["r"] = instance.revenues;
  json a = json::array();
  for (int k = 0; k < instance.num_resources; ++k) {
    json row = json::array();
    for (int i = 1; i <= instance.num_products; ++i) row.push_back(instance.consumes(i, k));
    a.push_back(std::move(row));
  }
  j["a"] = std::move(a);
  j["c"] = instance.capacity_rates;
  j["family"] = family_to_json(instance.family);
  j["v_star"] = instance.true_utilities.values;
  return j;
}

Instance instance_from_json(const json& j) try {
  Instance instance;
  instance.num_products = j.at("N").get<int>();
  instance.num_resources = j.at("K").get<int>();
  instance.horizon = j.at("T").get<long long>();
  instance.utility_bound = j.at("R").get<double>();
  instance.revenues = j.at("r").get<std::vector<double>>();
  instance.consumption = BinaryMatrix(instance.num_resources, instance.num_products);
  const json& a = j.at("a");
  if (static_cast<int>(a.size()) != instance.num_resources) {
    throw ConfigError("a must have K rows");
  }
  for (int k = 0; k < instance.num_resources; ++k) {
    const json& row = a[static_cast<std::size_t>(k)];
    if (static_cast<int>(row.size()) != instance.num_products) {
      throw ConfigError("a rows must have N entries");
    }
    for (int i = 1; i <= instance.num_products; ++i) {
      instance.consumption.set(k, i, row[static_cast<std::size_t>(i) - 1].get<int>());
    }
  }
  instance.capacity_rates = j.at("c").get<std::vector<double>>();
  instance.family = family_from_json_n(j.at("family"), instance.num_products);
  instance.true_utilities = UtilityVector::of(
      j.at("v_star").get<std::vector<double>>(), instance.utility_bound);
  instance.validate();
  return instance;
} catch (const json::exception& e) {
  throw ConfigError(std::string("malformed instance document: ") + e.what());
}

nlohmann::json run_log_to_json(const RunLog& log) {
  json j;
  j["seed"] = log.seed;
  j["t_stop"] = log.t_stop;
  j["total_revenue"] = log.total_revenue;
  j["final_capacity"] = log.final_capacity;
  json periods = json::array();
  for (const PeriodRecord& p : log.periods) {
    periods.push_back({{"t", p.t},
                       {"offered", p.offered.items()},
                       {"purchased", p.purchased},
                       {"revenue", p.revenue},
                       {"capacity_after", p.capacity_after}});
  }
  j["periods"] = std::move(periods);
  return j;
}

RunLog run_log_from_json(const json& j) {
  RunLog log;
  log.seed = j.at("seed").get<std::uint64_t>();
  log.t_stop = j.at("t_stop").get<long long>();
  log.total_revenue = j.at("total_revenue").get<double>();
  log.final_capacity = j.at("final_capacity").get<std::vector<long long>>();
  for (const json& p : j.at("periods")) {
    PeriodRecord record;
    record.t = p.at("t").get<long long>();
    record.offered = Assortment::of(p.at("offered").get<std::vector<int>>());
    record.purchased = p.at("purchased").get<int>();
    record.revenue = p.at("revenue").get<double>();
    record.capacity_after = p.at("capacity_after").get<std::vector<long long>>();
    log.periods.push_back(std::move(record));
  }
  return log;
}

nlohmann::json distribution_to_json(const lp::AssortmentDistribution& d) {
  json support = json::array();
  for (const auto& [s, w] : d.support) {
    support.push_back({{"items", s.items()}, {"weight", w}});
  }
  return support;
}

namespace {

class FieldErrors {
 public:
  void add(const std::string& message) { messages_.push_back(message); }
  void raise_if_any() const {
    if (messages_.empty()) return;
    std::string all = "invalid configuration:";
    for (const std::string& m : messages_) all += "\n  - " + m;
    throw ConfigError(all);
  }

 private:
  std::vector<std::string> messages_;
};

}  // namespace

ExperimentSpec experiment_spec_from_json(const json& j) try {
  FieldErrors errors;
  ExperimentSpec spec;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    errors.add("schema_version: required integer");
  } else if (j["schema_version"].get<int>() != 1) {
    errors.add("schema_version: unsupported version " + j["schema_version"].dump());
  }
  if (!j.contains("classes") || !j["classes"].is_array() || j["classes"].empty()) {
    errors.add("classes: required non-empty array");
  } else {
    int index = 0;
    for (const json& c : j["classes"]) {
      const std::string where = "classes[" + std::to_string(index++) + "]";
      try {
        ClassTuple klass;
        klass.name = c.contains("name") ? c.at("name").get<std::string>()
                                        : "class" + std::to_string(index - 1);
        const int n = c.at("N").get<int>();
        klass.num_resources = c.at("K").get<int>();
        klass.utility_bound = c.at("R").get<double>();
        klass.family = family_from_json_n(c.at("family"), n);
        spec.classes.push_back(std::move(klass));
      } catch (const std::exception& e) {
        errors.add(where + ": " + e.what());
      }
    }
  }
  if (!j.contains("horizons") || !j["horizons"].is_array() || j["horizons"].empty()) {
    errors.add("horizons: required non-empty array of positive integers");
  } else {
    for (const json& t : j["horizons"]) {
      if (!t.is_number_integer() || t.get<long long>() < 1) {
        errors.add("horizons: entries must be positive integers");
        break;
      }
      spec.horizons.push_back(t.get<long long>());
    }
  }
  auto positive_int = [&](const char* field, int fallback) {
    if (!j.contains(field)) return fallback;
    if (!j[field].is_number_integer() || j[field].get<int>() < 1) {
      errors.add(std::string(field) + ": must be a positive integer");
      return fallback;
    }
    return j[field].get<int>();
  };
  spec.models_per_cell = positive_int("models_per_cell", 5);
  spec.runs_per_model = positive_int("runs_per_model", 200);
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_integer()) {
      errors.add("master_seed: must be an integer");
    } else {
      spec.master_seed = j["master_seed"].get<std::uint64_t>();
    }
  }
  if (j.contains("threads")) spec.threads = j["threads"].get<int>();

  if (!j.contains("policy") || !j["policy"].is_object()) {
    errors.add("policy: required object");
  } else {
    const json& p = j["policy"];
    const std::string type = p.value("type", "");
    if (type == "online_tau") {
      spec.policy.type = PolicyConfig::Type::OnlineTau;
    } else if (type == "ucb") {
      spec.policy.type = PolicyConfig::Type::Ucb;
    } else if (type == "static_oracle") {
      spec.policy.type = PolicyConfig::Type::StaticOracle;
    } else if (type == "uniform_random") {
      spec.policy.type = PolicyConfig::Type::UniformRandom;
    } else {
      errors.add("policy.type: must be online_tau, ucb, static_oracle or uniform_random");
    }
    if (p.contains("tau_rule")) {
      if (p["tau_rule"].is_number_integer()) {
        spec.policy.tau_rule = std::to_string(p["tau_rule"].get<long long>());
      } else if (p["tau_rule"].is_string()) {
        spec.policy.tau_rule = p["tau_rule"].get<std::string>();
      } else {
        errors.add("policy.tau_rule: must be \"T^{2/3}\" or an integer");
      }
    }
    if (p.contains("delta")) {
      const double d = p["delta"].get<double>();
      if (!(d > 0.0 && d < 1.0)) {
        errors.add("policy.delta: must lie in (0,1)");
      } else {
        spec.policy.delta = d;
      }
    }
    spec.policy.ucb.psi_scale = p.value("psi_scale", 1.0);
    spec.policy.ucb.zero_widening = p.value("zero_widening", false);
    spec.policy.ucb.recompute_stride = p.value("recompute_stride", 1);
    spec.policy.ucb.mle_tol = p.value("mle_tol", 1e-8);
  }
  if (j.contains("generation")) {
    const json& g = j["generation"];
    spec.generation.revenue_lo = g.value("revenue_lo", 0.0);
    spec.generation.revenue_hi = g.value("revenue_hi", 1.0);
    spec.generation.consumption_density = g.value("consumption_density", 0.5);
    spec.generation.capacity_lo = g.value("capacity_lo", 0.25);
    spec.generation.capacity_hi = g.value("capacity_hi", 0.75);
  }
  if (j.contains("lp")) {
    const json& l = j["lp"];
    spec.lp.tol = l.value("tol", 1e-7);
    spec.lp.max_iterations = l.value("max_iterations", 500);
    spec.lp.enumeration_cap = l.value("enumeration_cap", kDefaultEnumerationCap);
  }
  errors.raise_if_any();
  return spec;
} catch (const json::exception& e) {
  throw ConfigError(std::string("malformed configuration: ") + e.what());
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return experiment_spec_from_json(j);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("instance is not valid JSON: " + std::string(e.what()));
  }
  return instance_from_json(j);
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write instance file: " + path);
  out << instance_to_json(instance).dump(2) << "\n";
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

void write_runs_csv(std::ostream& out, const ExperimentReport& report) {
  out << "class,T,model,seed,revenue,benchmark,regret,ratio,t_stop,"
         "support_match,cg_iter_max\n";
  for (const RunRecord& r : report.runs) {
    out << r.class_name << ',' << r.horizon << ',' << r.model << ',' << r.seed << ','
        << fmt(r.revenue) << ',' << fmt(r.benchmark) << ',' << fmt(r.regret) << ','
        << fmt(r.ratio) << ',' << r.t_stop << ',';
    if (r.support_matched.has_value()) out << (*r.support_matched ? 1 : 0);
    out << ',' << r.cg_iterations_max << '\n';
  }
}

void write_ratio_csv(std::ostream& out, const ExperimentReport& report) {
  out << "class,T,mean_ratio,ratio_std_across_models,ratio_std_across_runs\n";
  for (const CellAggregate& c : report.cells) {
    out << c.class_name << ',' << c.horizon << ',' << fmt(c.mean_ratio) << ','
        << fmt(c.ratio_std_across_models) << ',' << fmt(c.ratio_std_across_runs)
        << '\n';
  }
}

void write_regret_csv(std::ostream& out, const ExperimentReport& report) {
  out << "class,T,mean_regret,log10_T,log10_mean_regret\n";
  for (const CellAggregate& c : report.cells) {
    out << c.class_name << ',' << c.horizon << ',' << fmt(c.mean_regret) << ','
        << fmt(std::log10(static_cast<double>(c.horizon))) << ',';
    if (c.mean_regret > 0.0) out << fmt(std::log10(c.mean_regret));
    out << '\n';
  }
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  json cells = json::array();
  for (const CellAggregate& c : report.cells) {
    json cell{{"class", c.class_name},
              {"T", c.horizon},
              {"models", c.models},
              {"runs", c.runs},
              {"mean_revenue", c.mean_revenue},
              {"mean_benchmark", c.mean_benchmark},
              {"mean_regret", c.mean_regret},
              {"mean_ratio", c.mean_ratio},
              {"ratio_std_across_models", c.ratio_std_across_models},
              {"ratio_std_across_runs", c.ratio_std_across_runs},
              {"regret_std_across_models", c.regret_std_across_models},
              {"benchmark_degenerate_models", c.benchmark_degenerate_models},
              {"cg_iterations_max", c.cg_iterations_max},
              {"cg_iterations_mean", c.cg_iterations_mean}};
    if (c.support_match_fraction >= 0.0) {
      cell["support_match_fraction"] = c.support_match_fraction;
    }
    cells.push_back(std::move(cell));
  }
  json slopes = json::array();
  for (const SlopeFit& s : report.slopes) {
    slopes.push_back({{"class", s.class_name},
                      {"slope", s.slope},
                      {"intercept", s.intercept},
                      {"points", s.points}});
  }
  return json{{"schema_version", 1},
              {"cells", std::move(cells)},
              {"slopes", std::move(slopes)},
              {"failures", report.failures},
              {"totals",
               {{"runs", report.runs.size()},
                {"feasibility_violations", report.feasibility_violations},
                {"cg_iterations_max", report.cg_iterations_max},
                {"benchmark_cg_iterations_max", report.benchmark_cg_iterations_max},
                {"all_lp_optimal", report.all_lp_optimal}}}};
}

ExperimentReport read_runs_csv(std::istream& in) {
  ExperimentReport report;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty runs CSV");
  const std::string expected =
      "class,T,model,seed,revenue,benchmark,regret,ratio,t_stop,"
      "support_match,cg_iter_max";
  if (line != expected) throw ConfigError("unexpected runs CSV header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    // A trailing empty field (blank support_match) is not returned by
    // getline, so tolerate one missing column.
    while (fields.size() < 11) fields.emplace_back();
    if (fields.size() != 11) throw ConfigError("malformed runs CSV row: " + line);
    RunRecord r;
    r.class_name = fields[0];
    r.horizon = std::stoll(fields[1]);
    r.model = std::stoi(fields[2]);
    r.seed = std::stoull(fields[3]);
    r.revenue = std::stod(fields[4]);
    r.benchmark = std::stod(fields[5]);
    r.regret = std::stod(fields[6]);
    r.ratio = std::stod(fields[7]);
    r.t_stop = std::stoll(fields[8]);
    if (!fields[9].empty()) r.support_matched = fields[9] == "1";
    if (!fields[10].empty()) r.cg_iterations_max = std::stoi(fields[10]);
    report.cg_iterations_max = std::max(report.cg_iterations_max, r.cg_iterations_max);
    report.runs.push_back(std::move(r));
  }

  // Rebuild cells and slopes from the raw rows.
  std::map<std::pair<std::string, long long>, std::vector<const RunRecord*>> by_cell;
  for (const RunRecord& r : report.runs) {
    by_cell[{r.class_name, r.horizon}].push_back(&r);
  }
  for (const auto& [key, rows] : by_cell) {
    CellAggregate cell;
    cell.class_name = key.first;
    cell.horizon = key.second;
    std::map<int, std::vector<const RunRecord*>> by_model;
    for (const RunRecord* r : rows) by_model[r->model].push_back(r);
    cell.models = static_cast<int>(by_model.size());
    cell.runs = static_cast<long long>(rows.size());
    std::vector<double> model_ratio_means, model_regret_means, ratios;
    long long matches = 0, candidates = 0;
    double revenue_total = 0.0, benchmark_total = 0.0, cg_total = 0.0;
    for (const auto& [model, model_rows] : by_model) {
      double ratio_total = 0.0, regret_total = 0.0;
      for (const RunRecord* r : model_rows) {
        ratio_total += r->ratio;
        regret_total += r->regret;
        ratios.push_back(r->ratio);
        revenue_total += r->revenue;
        benchmark_total += r->benchmark;
        cg_total += r->cg_iterations_max;
        cell.cg_iterations_max = std::max(cell.cg_iterations_max, r->cg_iterations_max);
        if (r->support_matched.has_value()) {
          ++candidates;
          matches += *r->support_matched ? 1 : 0;
        }
      }
      model_ratio_means.push_back(ratio_total / static_cast<double>(model_rows.size()));
      model_regret_means.push_back(regret_total / static_cast<double>(model_rows.size()));
    }
    auto mean_of = [](const std::vector<double>& xs) {
      double t = 0.0;
      for (double x : xs) t += x;
      return xs.empty() ? 0.0 : t / static_cast<double>(xs.size());
    };
    auto std_of = [&](const std::vector<double>& xs) {
      if (xs.size() < 2) return 0.0;
      const double m = mean_of(xs);
      double ss = 0.0;
      for (double x : xs) ss += (x - m) * (x - m);
      return std::sqrt(ss / static_cast<double>(xs.size() - 1));
    };
    cell.mean_ratio = mean_of(model_ratio_means);
    cell.mean_regret = mean_of(model_regret_means);
    cell.mean_revenue = revenue_total / static_cast<double>(rows.size());
    cell.mean_benchmark = benchmark_total / static_cast<double>(rows.size());
    cell.ratio_std_across_models = std_of(model_ratio_means);
    cell.ratio_std_across_runs = std_of(ratios);
    cell.regret_std_across_models = std_of(model_regret_means);
    cell.cg_iterations_mean = cg_total / static_cast<double>(rows.size());
    if (candidates > 0) {
      cell.support_match_fraction =
          static_cast<double>(matches) / static_cast<double>(candidates);
    }
    report.cells.push_back(std::move(cell));
  }
  std::map<std::string, std::vector<std::pair<double, double>>> by_class;
  for (const CellAggregate& c : report.cells) {
    if (c.mean_regret > 0.0) {
      by_class[c.class_name].emplace_back(std::log(static_cast<double>(c.horizon)),
                                          std::log(c.mean_regret));
    } else {
      by_class.try_emplace(c.class_name);
    }
  }
  for (const auto& [name, points] : by_class) {
    SlopeFit fit;
    fit.class_name = name;
    fit.points = static_cast<int>(points.size());
    if (fit.points >= 2) {
      double mx = 0.0, my = 0.0;
      for (const auto& [x, y] : points) {
        mx += x;
        my += y;
      }
      mx /= fit.points;
      my /= fit.points;
      double sxx = 0.0, sxy = 0.0;
      for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
      }
      fit.slope = sxy / sxx;
      fit.intercept = my - fit.slope * mx;
    }
    report.slopes.push_back(std::move(fit));
  }
  return report;
}

}  // namespace assort::io
