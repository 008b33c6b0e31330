#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "glag/cli.hpp"
#include "glag/error.hpp"
#include "glag/field_theory.hpp"
#include "glag/harmonic.hpp"
#include "glag/pde_lagrange.hpp"

namespace glag::cli {

using Json = nlohmann::json;

/// Malformed scenario; the message starts with the offending key path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string task;
  std::string status = "ok";  // ok | config-error | domain-error | tolerance-failure
  std::string detail;
  std::map<std::string, double> scalars;
  std::map<std::string, Series> series;
  Json diagnostics = Json::object();
};

Json report_json(const Report& r, double wall_seconds);

/// Everything a task may need, validated up front. Optional members are the
/// sections that were absent from the scenario and have no preset default.
struct Scenario {
  Json raw;
  int m = 0;
  int n = 0;
  std::optional<Preset> preset;
  std::optional<Domain> domain;
  MetricField phi;
  MetricField psi;
  MetricField g;
  MetricField h;
  MetricField gamma;
  std::optional<SmoothMap> map;
  ConnectionTensor p;
  std::optional<RhsTensor> rhs;
  Expr sigma;
  double kappa = 1.0;
  Json tolerances = Json::object();

  /// Sub-object of the scenario, or an empty object.
  const Json& section(const char* key) const;
  const Domain& require_domain() const;
  const SmoothMap& require_map() const;
  const RhsTensor& require_rhs() const;
};

Scenario parse_scenario(const Json& j);

/// Applies "a.b.c=value"; the value is read as JSON when it parses, else as a string.
void apply_override(Json& j, const std::string& assignment);

// Typed accessors that report the key path on failure.
void expect_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed);
double number(const Json& j, const std::string& path);
int integer(const Json& j, const std::string& path);
Vector vector_of(const Json& j, const std::string& path, int size);
Expr expr_of(const Json& j, const std::string& path);
std::vector<Expr> exprs_of(const Json& j, const std::string& path, int size);
double number_or(const Json& obj, const char* key, const std::string& path, double fallback);

Report run_task(const std::string& task, const Scenario& sc);

}  // namespace glag::cli
