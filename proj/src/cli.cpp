#include "pmnl/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "pmnl/experiment.hpp"
#include "pmnl/serialization.hpp"

#ifndef PMNL_VERSION
#define PMNL_VERSION "0.0.0"
#endif

namespace pmnl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const char* const kDefaultPolicies = "pmnl,fixed_ucb,learn_then_earn";

struct RunSpec {
  std::string scenario_ref;
  std::optional<ojson> scenario_inline;
  std::vector<std::string> policies;
  std::optional<int> reps;
  std::uint64_t seed = 0;
  std::optional<long> horizon;
  std::string out = "runs";
  std::optional<int> grid;
  std::optional<double> bonus_scale;
  std::optional<bool> normalize_features;
  bool diagnostics = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  return out;
}

void apply_spec_file(const std::string& path, RunSpec& spec) {
  ojson j;
  try {
    j = ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("run spec '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.contains("scenario")) {
      if (j["scenario"].is_object()) {
        spec.scenario_inline = j["scenario"];
      } else {
        spec.scenario_ref = j["scenario"].get<std::string>();
      }
    }
    const ojson& r = j.contains("run") ? j["run"] : j;
    if (r.contains("policies")) {
      spec.policies = r["policies"].is_array() ? r["policies"].get<std::vector<std::string>>()
                                               : split_list(r["policies"].get<std::string>());
    }
    if (r.contains("reps")) spec.reps = r["reps"].get<int>();
    if (r.contains("seed")) spec.seed = r["seed"].get<std::uint64_t>();
    if (r.contains("horizon")) spec.horizon = r["horizon"].get<long>();
    if (r.contains("out")) spec.out = r["out"].get<std::string>();
    if (r.contains("grid")) spec.grid = r["grid"].get<int>();
    if (r.contains("bonus_scale")) spec.bonus_scale = r["bonus_scale"].get<double>();
    if (r.contains("normalize_features")) spec.normalize_features = r["normalize_features"].get<bool>();
    if (r.contains("diagnostics")) spec.diagnostics = r["diagnostics"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("malformed run spec '" + path + "': " + e.what());
  }
}

Scenario resolve_scenario(const RunSpec& spec) {
  Scenario s;
  if (!spec.scenario_ref.empty()) {
    s = load_scenario(spec.scenario_ref);
  } else if (spec.scenario_inline) {
    s = scenario_from_json(spec.scenario_inline->dump());
  } else {
    throw InvalidInput("no scenario given (use --scenario or a run spec)");
  }
  if (spec.horizon) s.horizon = *spec.horizon;
  if (spec.reps) s.n_reps = *spec.reps;
  if (spec.grid) s.search.grid_points = *spec.grid;
  if (spec.bonus_scale) s.bonus_scale = *spec.bonus_scale;
  if (spec.normalize_features) s.normalize_features = *spec.normalize_features;
  if (s.search.grid_points < 1) throw InvalidInput("--grid needs at least one point");
  if (!(s.bonus_scale >= 0.0)) throw InvalidInput("--bonus-scale must be nonnegative");
  return s;
}

std::string rep_stem(long rep) {
  std::ostringstream os;
  os << "rep_" << std::setw(3) << std::setfill('0') << rep;
  return os.str();
}

std::string trace_meta(const RegretTrace& t) {
  ojson j;
  j["policy"] = t.policy;
  j["scenario"] = t.scenario;
  j["seed"] = t.seed;
  j["replication"] = t.replication;
  j["periods"] = t.length();
  j["rng"] = std::string(Rng::kAlgorithm);
  j["regret"] = "expected revenue of the per-period oracle minus expected revenue of the chosen action";
  return j.dump(2) + "\n";
}

void write_trace(const fs::path& dir, const RegretTrace& trace) {
  auto csv = open_output(dir / (rep_stem(trace.replication) + ".csv"));
  write_trace_csv(csv, trace);
  auto meta = open_output(dir / (rep_stem(trace.replication) + ".meta.json"));
  meta << trace_meta(trace);
}

std::string manifest_json(const RunSpec& spec, const Scenario& s, const ValidationReport& report) {
  ojson j;
  j["tool"] = "pmnl";
  j["version"] = PMNL_VERSION;
  j["rng"] = {{"algorithm", std::string(Rng::kAlgorithm)},
              {"streams", "stream(seed, replication, purpose); truth=1 features=2 outcomes=3 policy=4"}};
  j["run"] = {{"policies", spec.policies},
              {"reps", s.n_reps},
              {"seed", spec.seed},
              {"horizon", s.horizon},
              {"grid", s.search.grid_points},
              {"bonus_scale", s.bonus_scale},
              {"normalize_features", s.normalize_features},
              {"diagnostics", spec.diagnostics}};
  j["scenario"] = ojson::parse(scenario_to_json(s));
  j["validation"] = {{"x_bar", report.x_bar},
                     {"x_norm_bound", report.x_norm_bound},
                     {"warnings", report.warnings}};
  return j.dump(2) + "\n";
}

int config_failure(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
  return kExitConfig;
}

int cmd_run(RunSpec spec, std::ostream& out, std::ostream& err) {
  Scenario s;
  ValidationReport report;
  try {
    s = resolve_scenario(spec);
    report = validate_scenario(s);
    const auto& known = policy_names();
    if (spec.policies.empty()) throw InvalidInput("no policies requested");
    for (const auto& p : spec.policies) {
      if (std::find(known.begin(), known.end(), p) == known.end()) {
        throw InvalidInput("unknown policy '" + p + "'");
      }
    }
    validate_policy_config(make_policy_config(s));
  } catch (const Error& e) {
    return config_failure(err, e);
  }
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";

  const fs::path root(spec.out);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) {
    err << "error: cannot create output directory '" << root.string() << "': " << ec.message() << "\n";
    return kExitConfig;
  }
  try {
    auto manifest = open_output(root / "manifest.json");
    manifest << manifest_json(spec, s, report);
  } catch (const Error& e) {
    return config_failure(err, e);
  }

  std::ofstream diag;
  ExperimentOptions options;
  options.policies = spec.policies;
  options.reps = s.n_reps;
  options.seed = spec.seed;
  if (spec.diagnostics) {
    diag = open_output(root / "diagnostics.jsonl");
    options.diagnostics = [&](const std::string&, const std::string& line) { diag << line << '\n'; };
  }

  ExperimentResult result;
  try {
    result = run_experiment(s, options);
  } catch (const ExperimentFailure& f) {
    const fs::path dir = root / f.policy();
    fs::create_directories(dir, ec);
    const fs::path path = dir / ("failure_" + rep_stem(f.replication()) + ".jsonl");
    {
      std::ofstream fail(path, std::ios::binary | std::ios::trunc);
      for (const auto& line : f.diagnostics()) fail << line << '\n';
    }
    RegretTrace partial = f.partial();
    partial.scenario = s.name;
    partial.seed = spec.seed;
    partial.replication = f.replication();
    write_trace(dir, partial);
    err << "error: " << f.what() << "\n";
    err << "diagnostics: " << path.string() << "\n";
    return kExitPolicyFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPolicyFailure;
  }

  for (const auto& run : result.runs) {
    const fs::path dir = root / run.policy;
    fs::create_directories(dir);
    for (const auto& trace : run.traces) write_trace(dir, trace);
    auto agg = open_output(dir / "aggregate.csv");
    write_bands_csv(agg, run.bands);
    const long T = static_cast<long>(run.bands.mean.size());
    out << run.policy << ": mean cumulative regret at T = " << T << " is "
        << format_number(run.bands.mean.back()) << "\n";
  }
  out << "wrote " << root.string() << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& ref, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = load_scenario(ref);
    const ValidationReport report = validate_scenario(s);
    validate_policy_config(make_policy_config(s));
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    out << "ok: " << s.name << " (x_bar = " << format_number(report.x_bar) << ")\n";
    return kExitOk;
  } catch (const Error& e) {
    return config_failure(err, e);
  }
}

int cmd_list(std::ostream& out) {
  out << "scenarios:\n";
  for (const auto& name : shipped_scenario_names()) {
    out << "  " << name << "  " << scenario_by_name(name).description << "\n";
  }
  out << "policies:\n";
  for (const auto& name : policy_names()) out << "  " << name << "\n";
  return kExitOk;
}

std::vector<std::string> run_policies(const fs::path& dir) {
  std::vector<std::string> policies;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    const ojson j = ojson::parse(read_file(manifest.string()));
    policies = j.at("run").at("policies").get<std::vector<std::string>>();
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "aggregate.csv")) {
        policies.push_back(entry.path().filename().string());
      }
    }
    std::sort(policies.begin(), policies.end());
  }
  return policies;
}

int cmd_plotdata(const std::string& dir_text, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  const fs::path dir(dir_text);
  if (!fs::is_directory(dir)) {
    err << "error: run directory '" << dir_text << "' does not exist\n";
    return kExitConfig;
  }
  std::ostringstream csv;
  try {
    const auto policies = run_policies(dir);
    if (policies.empty()) throw InvalidInput("no aggregate.csv found under '" + dir_text + "'");
    csv << "policy,period,statistic,value\n";
    for (const auto& policy : policies) {
      const fs::path path = dir / policy / "aggregate.csv";
      std::istringstream in(read_file(path.string()));
      std::string line;
      if (!std::getline(in, line) || line != "period,mean,p10,p90") {
        throw InvalidInput("'" + path.string() + "' lacks the aggregate header");
      }
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_list(line);
        if (fields.size() != 4) throw InvalidInput("malformed row in '" + path.string() + "'");
        static const char* const stats[] = {"mean", "p10", "p90"};
        for (int k = 0; k < 3; ++k) {
          csv << policy << ',' << fields[0] << ',' << stats[k] << ',' << fields[k + 1] << '\n';
        }
      }
    }
  } catch (const std::exception& e) {
    return config_failure(err, e);
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write '" << out_path << "'\n";
      return kExitConfig;
    }
    file << csv.str();
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint assortment and pricing simulator with Poisson arrivals and MNL choice", "pmnl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PMNL_VERSION);

  RunSpec spec;
  std::string spec_path, policies_text, normalize_text;
  int reps = 0, grid = 0;
  long horizon = 0;
  double bonus = 0.0;
  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment");
  run->add_option("--spec", spec_path, "Run spec or manifest (JSON)")->envname("PMNL_SPEC");
  auto* o_scenario = run->add_option("--scenario", spec.scenario_ref, "Shipped scenario name or file")
                         ->envname("PMNL_SCENARIO");
  auto* o_policies = run->add_option("--policies", policies_text, "Comma-separated policy names")
                         ->envname("PMNL_POLICIES");
  auto* o_reps = run->add_option("--reps", reps, "Replications")->envname("PMNL_REPS")->check(CLI::PositiveNumber);
  auto* o_seed = run->add_option("--seed", spec.seed, "Base seed")->envname("PMNL_SEED");
  auto* o_horizon = run->add_option("--horizon", horizon, "Periods T")->envname("PMNL_HORIZON")->check(CLI::PositiveNumber);
  auto* o_out = run->add_option("--out", spec.out, "Output directory")->envname("PMNL_OUT");
  auto* o_grid = run->add_option("--grid", grid, "Price grid points per product")->envname("PMNL_GRID");
  auto* o_bonus = run->add_option("--bonus-scale", bonus, "Multiplier on both confidence bonuses")
                      ->envname("PMNL_BONUS_SCALE");
  auto* o_norm = run->add_flag("--normalize-features{true}", normalize_text,
                               "Divide features by their largest possible norm")
                     ->envname("PMNL_NORMALIZE_FEATURES");
  auto* o_diag = run->add_flag("--diagnostics", "Write per-period policy diagnostics")
                     ->envname("PMNL_DIAGNOSTICS");

  std::string validate_ref;
  auto* validate = app.add_subcommand("validate", "Check a scenario against the model assumptions");
  validate->add_option("scenario", validate_ref, "Shipped scenario name or file")->required();

  app.add_subcommand("list", "List shipped scenarios and policies");

  std::string plot_dir, plot_out;
  auto* plot = app.add_subcommand("plotdata", "Reshape aggregates into long-format CSV");
  plot->add_option("dir", plot_dir, "Run output directory")->required();
  plot->add_option("--out", plot_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << PMNL_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    err << msg.str();
    return kExitConfig;
  }

  if (*run) {
    if (!spec_path.empty()) {
      try {
        RunSpec from_file;
        from_file.out = spec.out;
        apply_spec_file(spec_path, from_file);
        if (o_scenario->count() > 0) {
          from_file.scenario_ref = spec.scenario_ref;
          from_file.scenario_inline.reset();
        }
        if (o_seed->count() > 0) from_file.seed = spec.seed;
        if (o_out->count() > 0) from_file.out = spec.out;
        spec = std::move(from_file);
      } catch (const Error& e) {
        return config_failure(err, e);
      }
    }
    if (o_policies->count() > 0) spec.policies = split_list(policies_text);
    if (spec.policies.empty()) spec.policies = split_list(kDefaultPolicies);
    if (o_reps->count() > 0) spec.reps = reps;
    if (o_horizon->count() > 0) spec.horizon = horizon;
    if (o_grid->count() > 0) spec.grid = grid;
    if (o_bonus->count() > 0) spec.bonus_scale = bonus;
    if (o_norm->count() > 0) {
      spec.normalize_features = normalize_text != "false" && normalize_text != "0";
    }
    if (o_diag->count() > 0) spec.diagnostics = true;
    return cmd_run(std::move(spec), out, err);
  }
  if (*validate) return cmd_validate(validate_ref, out, err);
  if (*plot) return cmd_plotdata(plot_dir, plot_out, out, err);
  return cmd_list(out);
}

}  // namespace pmnl
