#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reinsure/hjb.hpp"
#include "reinsure/simulate.hpp"
#include "reinsure/verify.hpp"

namespace reinsure::csv {

/// Shortest round-trip-safe decimal text: 17 significant digits.
std::string format(double value);

/// Writes `contents` to `path` through a temporary file and a rename, so
/// readers never observe a partially written file.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

inline constexpr const char* kValuePolicyHeader = "y,x,psi,u_star,dividend_flag";
inline constexpr const char* kSolveReportHeader =
    "iterations,sup_residual,converged,policy_changes_last_iter,total_sweeps,m_matrix_ok,barrier";
inline constexpr const char* kEstimateHeader = "x0,mean,std_error,paths,seed";
inline constexpr const char* kPathHeader = "path_id,time,event,reserve_after,amount";
inline constexpr const char* kVerifyHeader = "check,passed,worst_violation,location";
inline constexpr const char* kCounterexampleHeader =
    "r,analytic,mc_estimate,std_error,paths,seed,survival_estimate,survival_std_error,"
    "survival_analytic,grid_x1,grid_v_x1,grid_k";

std::string value_policy(const ValueGrid& values);
std::string solve_report(const SolveReport& report, double barrier);

struct EstimateRow {
  double x0;
  McEstimate estimate;
};
std::string estimates(std::span<const EstimateRow> rows);

std::string path_events(std::size_t path_id, const PathRecord& record, bool with_header);
std::string verify_report(std::span<const PropertyReport> reports);

struct CounterexampleRow {
  double r;
  CounterexampleResult result;
  double grid_x1;
  double grid_v_x1;
  double grid_k;
};
std::string counterexample(const CounterexampleRow& row);

/// Parses a value/policy table written by value_policy().  Throws
/// std::runtime_error on a malformed file or a node layout that is not the
/// uniform y_j = j/n mesh.
ValueGrid read_value_policy(const std::filesystem::path& path);
ValueGrid parse_value_policy(const std::string& text);

} // namespace reinsure::csv
