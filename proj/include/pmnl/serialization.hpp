#pragma once

// Line-delimited JSON for histories, Fisher states and policy diagnostics.
// Record layouts are described in docs/formats.md.

#include <iosfwd>
#include <string>
#include <string_view>

#include "pmnl/estimation.hpp"
#include "pmnl/policy.hpp"

namespace pmnl {

/// One JSON object per line, one line per period.
void write_history_jsonl(std::ostream& out, const History& history);
History read_history_jsonl(std::istream& in);

/// A header line, one line per accumulated period, then a trailer holding the
/// current matrices.
void write_fisher_jsonl(std::ostream& out, const FisherState& state);
FisherState read_fisher_jsonl(std::istream& in);

std::string observation_to_json(const PeriodObservation& observation);
PeriodObservation observation_from_json(std::string_view line);

/// Single-line diagnostics record tagged with policy and replication.
std::string diagnostics_to_json(const PeriodDiagnostics& diagnostics, std::string_view policy,
                                long replication);

}  // namespace pmnl
