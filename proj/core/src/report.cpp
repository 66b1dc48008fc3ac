#include "driftbench/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "driftbench/binio.hpp"

namespace driftbench {

namespace {
using Json = nlohmann::ordered_json;
constexpr int kSchemaVersion = 1;
}  // namespace

std::string report_to_json(const RunReport& report) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = report.command;

  Json config = Json::object();
  for (const auto& [key, value] : report.config) config[key] = value;
  j["config"] = std::move(config);

  j["tasks"] = report.tasks;
  j["seen_classes"] = report.seen_classes;
  j["accuracy_matrix"] = report.matrix.rows();
  j["union_scores"] = report.union_scores;

  Json metrics;
  metrics["A"] = report.metric_a;
  metrics["F"] = report.metric_f;
  metrics["a_kk"] = report.a_kk;
  if (report.joint_reference.empty()) {
    metrics["joint_reference"] = nullptr;
    metrics["I"] = nullptr;
  } else {
    metrics["joint_reference"] = report.joint_reference;
    metrics["I"] = report.intransigence;
  }
  j["metrics"] = std::move(metrics);

  Json storage;
  storage["method"] = method_name(report.method);
  storage["param_count"] = report.param_count;
  storage["model_bytes"] = report.model_bytes;
  storage["exemplar_budget_bytes"] = report.exemplar_budget_bytes;
  storage["total_bytes"] = report.storage_total_bytes;
  storage["tasks"] = report.tasks.size();
  storage["model_mb"] = static_cast<double>(report.model_bytes) / 1e6;
  storage["total_mb"] = static_cast<double>(report.storage_total_bytes) / 1e6;
  j["storage"] = std::move(storage);

  j["optimizer_reset_per_task"] = true;

  if (!report.search_section.empty()) j["search"] = Json::parse(report.search_section);
  if (!report.joint_section.empty()) j["joint"] = Json::parse(report.joint_section);

  Json timing;
  Json per_task = Json::array();
  for (const auto& t : report.latency.per_task) {
    Json entry;
    entry["train_s"] = t.train_seconds;
    entry["il_s"] = t.il_seconds;
    per_task.push_back(std::move(entry));
  }
  timing["per_task"] = std::move(per_task);
  timing["total_train_s"] = report.latency.total_train_seconds;
  timing["total_il_s"] = report.latency.total_il_seconds;
  timing["mean_train_s"] = report.latency.mean_train_seconds;
  timing["mean_il_s"] = report.latency.mean_il_seconds;
  j["timing"] = std::move(timing);

  return j.dump(2) + "\n";
}

std::string matrix_to_csv(const AccuracyMatrix& matrix) {
  std::ostringstream os;
  os << "task";
  for (std::size_t j = 1; j <= matrix.tasks(); ++j) os << ",a_k" << j;
  os << "\n";
  os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 1; k <= matrix.tasks(); ++k) {
    os << k;
    for (std::size_t j = 1; j <= matrix.tasks(); ++j) {
      os << ",";
      if (j <= k) os << matrix.at(k, j);
    }
    os << "\n";
  }
  return os.str();
}

void write_run_report(const RunReport& report, const std::string& dir, bool force) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path report_path = fs::path(dir) / "report.json";
  if (fs::exists(report_path) && !force)
    throw std::runtime_error("report already exists at " + report_path.string() +
                             " (use --force to overwrite)");
  write_file(report_path.string(), report_to_json(report));
  write_file((fs::path(dir) / "matrix.csv").string(), matrix_to_csv(report.matrix));
}

ReportSummary load_report_summary(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("cannot parse report " + path + ": " + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != kSchemaVersion)
    throw std::runtime_error("report " + path + " has an unsupported schema version");

  ReportSummary s;
  s.command = j.value("command", "");
  const auto& config = j.at("config");
  s.strategy = config.value("strategy", "");
  s.scenario = std::stoi(config.value("scenario", "0"));
  s.variation_seed = std::stoull(config.value("variation_seed", "0"));
  s.tasks = j.at("tasks").size();

  const auto& metrics = j.at("metrics");
  const auto& a = metrics.at("A");
  if (!a.empty()) s.final_a = a.back().get<double>();
  const auto& f = metrics.at("F");
  s.final_f = f.empty() ? std::numeric_limits<double>::quiet_NaN()
                        : f.back().get<double>();
  const auto& akk = metrics.at("a_kk");
  if (!akk.empty()) s.final_akk = akk.back().get<double>();
  const auto& u = j.at("union_scores");
  if (!u.empty()) s.final_union = u.back().get<double>();

  if (j.contains("joint") && j["joint"].contains("a_star"))
    s.a_star = j["joint"]["a_star"].get<std::vector<double>>();
  return s;
}

}  // namespace driftbench
