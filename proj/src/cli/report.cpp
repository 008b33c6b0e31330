#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "internal.hpp"

namespace glag::cli {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Non-finite numbers are written as strings; JSON has no literal for them.
Json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

Json report_json(const Report& r, double wall_seconds) {
  Json j;
  j["task"] = r.task;
  j["status"] = r.status;
  j["detail"] = r.detail;
  j["scalars"] = Json::object();
  for (const auto& [k, v] : r.scalars) j["scalars"][k] = number_json(v);
  j["series"] = Json::object();
  for (const auto& [k, s] : r.series) {
    Json rows = Json::array();
    for (const auto& row : s.rows) {
      Json jr = Json::array();
      for (double v : row) jr.push_back(number_json(v));
      rows.push_back(std::move(jr));
    }
    j["series"][k] = {{"columns", s.columns}, {"rows", std::move(rows)}};
  }
  j["diagnostics"] = r.diagnostics;
  // Everything that varies between identical runs lives here.
  j["timestamp"] = {{"utc", utc_now()}, {"wall_seconds", wall_seconds}};
  return j;
}

RunResult run(const std::string& task, const std::string& scenario_json, const std::vector<std::string>& overrides) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.task = task;
  RunResult result;
  try {
    Json j = Json::parse(scenario_json);
    for (const auto& o : overrides) apply_override(j, o);
    if (std::find(task_names().begin(), task_names().end(), task) == task_names().end()) {
      throw ConfigError("unknown task '" + task + "'");
    }
    report = run_task(task, parse_scenario(j));
    if (report.status == "tolerance-failure") {
      result.exit_code = kToleranceFailure;
      result.error = report.detail;
    }
  } catch (const NumericalError& e) {
    report.status = "domain-error";
    report.detail = e.what();
    report.diagnostics["condition"] = e.condition();
    report.diagnostics["location"] = e.location();
    result.exit_code = kDomainError;
    result.error = e.what();
  } catch (const Json::exception& e) {
    report.status = "config-error";
    report.detail = std::string("scenario: ") + e.what();
    result.exit_code = kConfigError;
    result.error = report.detail;
  } catch (const std::exception& e) {
    // ConfigError, ParseError, InvalidArgument (orthonormality, unit checks, ...)
    report.status = "config-error";
    report.detail = e.what();
    result.exit_code = kConfigError;
    result.error = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = report_json(report, wall).dump(2) + "\n";
  return result;
}

int main(int argc, char** argv) {
  CLI::App app{"Harmonic maps between generalized Lagrange spaces: scenario runner"};
  std::string task, scenario_path, out_path;
  std::vector<std::string> overrides;
  app.add_option("task", task, "Task to run")->required()->check(CLI::IsMember(task_names()));
  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--set", overrides, "Override a scenario value: dotted.key=value")->take_all();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  std::ifstream in(scenario_path);
  if (!in) {
    std::cerr << "glag: cannot read scenario '" << scenario_path << "'\n";
    return kConfigError;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const RunResult result = run(task, buf.str(), overrides);
  if (result.exit_code != kOk) std::cerr << "glag: " << task << ": " << result.error << "\n";
  if (out_path.empty()) {
    std::cout << result.report;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "glag: cannot write '" << out_path << "'\n";
      return kConfigError;
    }
    out << result.report;
  }
  return result.exit_code;
}

}  // namespace glag::cli
