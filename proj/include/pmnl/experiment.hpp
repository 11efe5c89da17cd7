#pragma once

// Monte-Carlo runner: every policy sees the same truth, feature sequence and
// outcome stream within a replication.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pmnl/scenario.hpp"

namespace pmnl {

struct ExperimentOptions {
  std::vector<std::string> policies;
  int reps = 1;
  std::uint64_t seed = 0;
  /// Receives every diagnostics record as a JSON line, in (policy, rep, period) order.
  std::function<void(const std::string& policy, const std::string& line)> diagnostics;
};

struct PolicyRuns {
  std::string policy;
  std::vector<RegretTrace> traces;  // one per replication
  Bands bands;                      // over cumulative regret
};

struct ExperimentResult {
  std::vector<PolicyRuns> runs;  // in the order requested
};

/// A policy failed; carries the failing episode's diagnostics lines.
class ExperimentFailure : public Error {
 public:
  ExperimentFailure(const EpisodeFailure& cause, std::string policy, long replication,
                    std::vector<std::string> diagnostics)
      : Error(cause.what()),
        policy_(std::move(policy)),
        replication_(replication),
        period_(cause.period()),
        partial_(cause.partial()),
        diagnostics_(std::move(diagnostics)) {}

  const std::string& policy() const { return policy_; }
  long replication() const { return replication_; }
  long period() const { return period_; }
  const RegretTrace& partial() const { return partial_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::string policy_;
  long replication_;
  long period_;
  RegretTrace partial_;
  std::vector<std::string> diagnostics_;
};

/// Runs one replication of one policy.
RegretTrace run_replication(const Scenario& scenario, const std::string& policy,
                            std::uint64_t seed, long replication,
                            const DiagnosticsSink& sink = {});

ExperimentResult run_experiment(const Scenario& scenario, const ExperimentOptions& options);

}  // namespace pmnl
