#include "pmnl/experiment.hpp"

#include <algorithm>

#include "pmnl/serialization.hpp"

namespace pmnl {

namespace {

struct Replication {
  Environment env;
  EpisodeContext context;
};

Replication prepare(const Scenario& scenario, std::uint64_t seed, long rep) {
  Replication r;
  r.env = instantiate(scenario, seed, rep);
  Rng feature_rng = Rng::stream(seed, static_cast<std::uint64_t>(rep), kStreamFeatures);
  r.context = prepare_episode(r.env, scenario.horizon, feature_rng);
  return r;
}

RegretTrace run_policy(const Scenario& scenario, const PolicyConfig& config,
                       const Replication& r, const std::string& name, std::uint64_t seed,
                       long rep, const DiagnosticsSink& sink) {
  PolicyContext pc;
  pc.config = config;
  pc.truth = r.env.truth;
  pc.seed = Rng::stream(seed, static_cast<std::uint64_t>(rep), kStreamPolicy).next();
  pc.lte_d_optimal = scenario.lte_d_optimal;
  auto policy = make_policy(name, pc);
  Rng outcome_rng = Rng::stream(seed, static_cast<std::uint64_t>(rep), kStreamOutcomes);
  RegretTrace trace = run_episode(*policy, r.env, r.context, outcome_rng, sink);
  trace.scenario = scenario.name;
  trace.seed = seed;
  trace.replication = rep;
  return trace;
}

}  // namespace

RegretTrace run_replication(const Scenario& scenario, const std::string& policy,
                            std::uint64_t seed, long replication, const DiagnosticsSink& sink) {
  validate_scenario(scenario);
  const Replication r = prepare(scenario, seed, replication);
  return run_policy(scenario, make_policy_config(scenario), r, policy, seed, replication, sink);
}

ExperimentResult run_experiment(const Scenario& scenario, const ExperimentOptions& options) {
  if (options.reps < 1) throw InvalidInput("reps must be at least 1");
  for (const auto& name : options.policies) {
    const auto& known = policy_names();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw InvalidInput("unknown policy '" + name + "'");
    }
  }
  validate_scenario(scenario);
  const PolicyConfig config = make_policy_config(scenario);
  validate_policy_config(config);

  ExperimentResult result;
  for (const auto& name : options.policies) result.runs.push_back({name, {}, {}});
  for (long rep = 0; rep < options.reps; ++rep) {
    const Replication r = prepare(scenario, options.seed, rep);
    for (auto& run : result.runs) {
      std::vector<std::string> lines;
      const DiagnosticsSink sink = [&](const PeriodDiagnostics& d) {
        lines.push_back(diagnostics_to_json(d, run.policy, rep));
      };
      try {
        run.traces.push_back(run_policy(scenario, config, r, run.policy, options.seed, rep, sink));
      } catch (const EpisodeFailure& e) {
        throw ExperimentFailure(e, run.policy, rep, std::move(lines));
      }
      if (options.diagnostics) {
        for (const auto& line : lines) options.diagnostics(run.policy, line);
      }
    }
  }
  for (auto& run : result.runs) {
    std::vector<std::vector<double>> series;
    series.reserve(run.traces.size());
    for (const auto& t : run.traces) series.push_back(t.cumulative_regret);
    run.bands = aggregate(series);
  }
  return result;
}

}  // namespace pmnl
