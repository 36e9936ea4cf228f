#pragma once

#include "rpcls/core.hpp"
#include "rpcls/experiment.hpp"
#include "rpcls/rpc.hpp"
#include "rpcls/sketch.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace rpcls {

nlohmann::json to_json(const SketchSpec& spec);
SketchSpec sketch_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolverReport& report);
nlohmann::json to_json(const RpcSolution& solution);

/// Reads JSON-lines trial records; blank lines are skipped.
std::vector<TrialRecord> read_records(std::istream& in);
void write_record(std::ostream& out, const TrialRecord& record);

/// Performance profile CSV with header "group,fraction,value". Records are grouped
/// by the requested keys (any of "method", "sketch", "m"), joined with '/'. Failed
/// records are skipped; groups left empty produce a warning and no rows.
std::string emit_profile(const std::vector<TrialRecord>& records, const std::vector<std::string>& group_by);

/// Profile CSV for a plain list of residual factors, under group label `group`.
std::string emit_profile_values(const std::vector<double>& values, const std::string& group = "all");

/// Per (method, sketch, m): mean seconds of each phase over successful records.
/// Header "method,sketch,m,count,sketch_s,factor_s,solve_s,total_s"; total is the
/// sum of the three phase means.
std::string emit_timing_breakdown(const std::vector<TrialRecord>& records);

}  // namespace rpcls
