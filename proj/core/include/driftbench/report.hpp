#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "driftbench/costs.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/strategy.hpp"

namespace driftbench {

/// Everything a finished run reports. Serialized as versioned JSON with all
/// timing isolated under a single "timing" key, so reproducibility checks can
/// hash the report with that key dropped.
struct RunReport {
  std::string command;  // run | search | joint
  std::vector<std::pair<std::string, std::string>> config;  // resolved, ordered
  std::vector<std::vector<int>> tasks;
  std::vector<int> seen_classes;
  AccuracyMatrix matrix;
  std::vector<double> union_scores;

  std::vector<double> metric_a;        // A_k for k = 1..K
  std::vector<double> metric_f;        // F_k for k = 2..K
  std::vector<double> a_kk;            // diagonal
  std::vector<double> joint_reference; // a*_k when available, else empty
  std::vector<double> intransigence;   // I_k when joint_reference set

  MethodKind method = MethodKind::kNone;
  std::size_t param_count = 0;
  std::uint64_t model_bytes = 0;
  std::uint64_t exemplar_budget_bytes = 0;
  std::uint64_t storage_total_bytes = 0;

  LatencyProfile latency;

  // Extra sections, already-serialized JSON (search leaderboard, joint table);
  // empty when absent.
  std::string search_section;
  std::string joint_section;
};

std::string report_to_json(const RunReport& report);
std::string matrix_to_csv(const AccuracyMatrix& matrix);

/// Writes report.json and matrix.csv into `dir` (created if needed). Refuses
/// to overwrite an existing report unless force is set.
void write_run_report(const RunReport& report, const std::string& dir, bool force);

/// The fields cmd_report needs when aggregating finished runs.
struct ReportSummary {
  std::string command;
  std::string strategy;
  int scenario = 0;
  std::uint64_t variation_seed = 0;
  std::size_t tasks = 0;
  double final_a = 0.0;
  double final_f = 0.0;  // NaN when k < 2
  double final_akk = 0.0;
  double final_union = 0.0;
  std::vector<double> a_star;  // joint runs only
};

ReportSummary load_report_summary(const std::string& path);

}  // namespace driftbench
