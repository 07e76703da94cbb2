#pragma once

#include <string>
#include <vector>

#include "mcl/experiment.hpp"

namespace mcl {

/// instance_id,policy_name,detail,gain,optimal_gain,gap_percent. Failed
/// instances get a row with policy_name "error" and the message as detail.
/// Deterministic for a fixed configuration; no timings.
std::string write_gap_csv(const std::vector<GapReport>& reports);
std::vector<GapReport> read_gap_csv(const std::string& text);

/// phase,seconds per instance.
std::string write_timings_csv(const std::vector<GapReport>& reports);

/// Gap percentages as an aligned table, one column per instance.
std::string render_gap_table(const std::vector<GapReport>& reports);

}  // namespace mcl
