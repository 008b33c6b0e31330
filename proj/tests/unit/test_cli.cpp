#include <cmath>
#include <numbers>

#include "doctest.h"
#include "glag/cli.hpp"
#include "json.hpp"

using glag::cli::run;
using Json = nlohmann::json;

namespace {

Json report_of(const glag::cli::RunResult& r) { return Json::parse(r.report); }

const char* kExp = R"j({"dims": {"m": 2, "n": 1}, "preset": {"name": "pseudolinear-exp"}, "verify": {"level_set": true}})j";
const char* kOrbit = R"j({"dims": {"m": 1, "n": 2}, "preset": {"name": "orbit"}})j";

}  // namespace

TEST_CASE("verify-solution on the exponential preset") {
  const auto r = run("verify-solution", kExp);
  REQUIRE(r.exit_code == glag::cli::kOk);
  const Json j = report_of(r);
  CHECK(j["status"] == "ok");
  CHECK(j["scalars"]["system_residual"].get<double>() <= 1e-12);
  CHECK(j["scalars"]["level_set_deviation"].get<double>() <= 1e-6);
}

TEST_CASE("lt on the unit-circle orbit") {
  const Json j = report_of(run("lt", kOrbit));
  CHECK(j["scalars"]["lt"].get<double>() == doctest::Approx(std::numbers::pi).epsilon(1e-9));
  CHECK(j["scalars"]["half_vol"].get<double>() == doctest::Approx(std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("configuration errors exit with 1") {
  CHECK(run("lt", R"j({"preset": {"name": "orbit"}})j").exit_code == glag::cli::kConfigError);
  CHECK(run("lt", R"j({"dims": {"m": 1, "n": 2}, "preset": {"name": "orbit"}, "colour": 1})j").exit_code ==
        glag::cli::kConfigError);
  CHECK(run("lt", "{ not json").exit_code == glag::cli::kConfigError);
  CHECK(run("fly", kOrbit).exit_code == glag::cli::kConfigError);
  CHECK(run("energy", R"j({"dims": {"m": 1, "n": 1}, "domain": {"lo": [0], "hi": [1]}, "map": ["a1 +"]})j")
            .exit_code == glag::cli::kConfigError);
}

TEST_CASE("numerical domain errors exit with 2 and name the node") {
  const auto r = run("energy", R"j({"dims": {"m": 1, "n": 1}, "domain": {"lo": [0], "hi": [1]},
                                   "map": ["sqrt(a1 - 0.5)"]})j");
  CHECK(r.exit_code == glag::cli::kDomainError);
  const Json j = report_of(r);
  CHECK(j["status"] == "domain-error");
  CHECK_FALSE(j["diagnostics"]["location"].get<std::string>().empty());
  CHECK_FALSE(j["diagnostics"]["condition"].get<std::string>().empty());
}

TEST_CASE("tolerance failures exit with 3") {
  const auto r = run("verify-solution", kExp, {"map=[\"exp(a1 + a2)\"]"});
  CHECK(r.exit_code == glag::cli::kToleranceFailure);
  CHECK(report_of(r)["status"] == "tolerance-failure");
}

TEST_CASE("field task with sigma = 0 gives zero electromagnetic tensors") {
  const Json j = report_of(run("field", R"j({"dims": {"m": 1, "n": 2},
      "metrics": {"gamma": {"diagonal": ["1", "sin(x1)^2"]}}, "sigma": "0",
      "field": {"points": [{"x": [0.7, 0.3], "y": [0.2, 1.0]}]}})j"));
  CHECK(j["scalars"]["max_F"].get<double>() == 0.0);
  CHECK(j["scalars"]["max_f"].get<double>() == 0.0);
}

TEST_CASE("geodesic transfer with the identity map") {
  const Json j = report_of(run("geodesic-transfer", R"j({"dims": {"m": 2, "n": 2},
      "domain": {"lo": [0, 0], "hi": [1, 1]}, "metrics": {"g": "identity", "phi": "identity", "h": "identity"},
      "map": ["a1", "a2"], "transfer": {"samples": [{"p0": [0.1, 0.2], "v0": [1, 0.4]}]}})j"));
  CHECK(j["scalars"]["max_image_residual"].get<double>() <= 1e-5);
  CHECK(j["scalars"]["max_el_residual"].get<double>() <= 1e-5);
}

TEST_CASE("gauge sweep is flat") {
  const Json j = report_of(run("sweep", R"j({"dims": {"m": 2, "n": 1}, "preset": {"name": "general-4.1"},
      "sweep": {"task": "lt", "parameter": "preset.theta", "range": {"from": 0, "to": 3, "count": 6},
                "output": "lt"}})j"));
  CHECK(j["scalars"]["spread"].get<double>() <= 1e-10);
  CHECK(j["scalars"]["min"].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(j["series"]["sweep"]["rows"].size() == 6);
}

TEST_CASE("overrides apply before validation") {
  const Json j = report_of(run("lt", kExp, {"preset.v=[2, 1]", "preset.w=0.5"}));
  CHECK(j["status"] == "ok");
  CHECK(std::abs(j["scalars"]["gap"].get<double>()) <= 1e-10);
}

TEST_CASE("reports are deterministic apart from the timestamp") {
  for (const char* task : {"lt", "energy", "verify-solution"}) {
    Json a = report_of(run(task, kExp));
    Json b = report_of(run(task, kExp));
    a.erase("timestamp");
    b.erase("timestamp");
    CHECK(a.dump() == b.dump());
  }
}
