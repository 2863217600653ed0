#pragma once

// JSON and CSV exports for the public data types.

#include <string>

#include <json.hpp>

#include "gpjet/gp.hpp"
#include "gpjet/multi_fidelity.hpp"
#include "gpjet/physics_jet.hpp"
#include "gpjet/planner.hpp"

namespace gpjet::io {

using Json = nlohmann::ordered_json;

/// Parameter table as `parameter,value` rows in the published order.
std::string groups_table_csv(const jet::DimensionlessGroups& groups);

Json to_json(const jet::DimensionlessGroups& groups);
/// Overrides fields of `base` from `j`; unknown keys or non-numbers throw ConfigError.
jet::DimensionlessGroups groups_from_json(const Json& j, jet::DimensionlessGroups base);

Json to_json(const jet::RadiusProfile& profile);
Json gp_summary(const gp::GPModel& model);
Json mf_summary(const mf::MFModel& model);

Json to_json(const planner::IterationRecord& record);
Json to_json(const planner::RunRecord& record);
/// One JSON object per iteration, newline terminated.
std::string run_jsonl(const planner::RunRecord& record);
/// `iter,x,y,rmse,mciw,min_regret`; missing values are left empty.
std::string run_csv(const planner::RunRecord& record, bool header = true);

}  // namespace gpjet::io
