#include <fmt/format.h>
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helios/cli/commands.hpp"
#include "helios/cli/manifest.hpp"
#include "helios/cli/scenario.hpp"
#include "helios/cli/svg.hpp"
#include "helios/numerics.hpp"
#include "helios/transport.hpp"

using namespace helios;
using namespace helios::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = HELIOS_SCENARIO_DIR;

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "helios_cli_tests" / name;
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      row.push_back(end == cell.c_str() ? std::nan("") : v);
    }
    rows.push_back(row);
  }
  return rows;
}

const char* kMinimal = R"({"schema": 1, "name": "t",
  "medium": {"kind": "homogeneous", "n0": 1.0, "domain": {"lo": [-1, -1, -1], "hi": [1, 1, 1]}}})";

}  // namespace

TEST(Scenario, ParsesSampleScenarios) {
  for (const char* name : {"fisheye_trace.json", "homogeneous_trace.json", "fisheye_transport.json",
                           "measure_zero.json", "measure_sphere_source.json", "wigner_homogeneous.json"}) {
    EXPECT_NO_THROW(load_scenario(kScenarios / name)) << name;
  }
  const Scenario sc = load_scenario(kScenarios / "fisheye_trace.json");
  EXPECT_EQ(sc.rays.size(), 2u);
  EXPECT_EQ(sc.rays[0].id, "equatorial");
  EXPECT_EQ(sc.field().kind_name(), "fisheye");
  EXPECT_EQ(sc.integrator.scheme, Scheme::implicit_midpoint);
  EXPECT_EQ(sc.inputs.size(), 1u);
}

TEST(Scenario, RejectsUnknownKeysAnywhere) {
  EXPECT_THROW(parse_scenario(R"({"schema": 1, "colour": "red"})", "."), SchemaError);
  EXPECT_THROW(parse_scenario(R"({"schema": 1, "medium": {"kind": "homogeneous", "n0": 1, "domain":
      {"lo": [-1,-1,-1], "hi": [1,1,1]}, "n1": 2}})", "."), SchemaError);
  EXPECT_THROW(parse_scenario(R"({"schema": 1, "rays": [{"q0": [0,0,0], "direction": [1,0,0], "speed": 1}]})", "."),
               SchemaError);
}

TEST(Scenario, RejectsWrongTypesAndVersions) {
  EXPECT_THROW(parse_scenario(R"({"name": "no schema"})", "."), SchemaError);
  EXPECT_THROW(parse_scenario(R"({"schema": 2})", "."), SchemaError);
  EXPECT_THROW(parse_scenario(R"({"schema": 1, "duration": "long"})", "."), SchemaError);
  EXPECT_THROW(parse_scenario(R"({"schema": 1, "rays": [{"q0": [0,0], "direction": [1,0,0]}]})", "."), SchemaError);
  EXPECT_THROW(parse_scenario(R"({"schema": 1, "integrator": {"dt": -1}})", "."), SchemaError);
  EXPECT_THROW(parse_scenario("{\"schema\": 1,", "."), SchemaError);
  EXPECT_THROW(parse_scenario(R"({"schema": 1, "medium": {"kind": "linear", "n0": 0.5, "gradient": [1,0,0],
      "domain": {"lo": [-1,-1,-1], "hi": [1,1,1]}}})", "."), SchemaError);
}

TEST(Scenario, CanonicalTextIgnoresFormatting) {
  const Scenario a = parse_scenario(kMinimal, ".");
  const Scenario b = parse_scenario(R"({ "medium" : {"domain": {"hi": [1,1,1], "lo": [-1,-1,-1]}, "n0": 1.0,
      "kind": "homogeneous"}, "name": "t", "schema": 1 })", ".");
  EXPECT_EQ(a.canonical, b.canonical);
}

TEST(Manifest, GitBlobHashes) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
}

TEST(Svg, RendersSeries) {
  const std::string svg = render_plot({"t", "x", "y", true, true, false},
                                      {{"line", {1, 2, 4}, {1, 0.5, 0.25}, false}, {"dots", {1, 2}, {1, 2}, true}});
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Commands, TraceHomogeneousIsAStraightLine) {
  const fs::path out = fresh_dir("trace_homogeneous");
  ASSERT_EQ(run_command("trace", (kScenarios / "homogeneous_trace.json").string(), {out}), kOk);
  const auto rows = read_csv(out / "trajectory_straight.csv");
  ASSERT_EQ(rows.size(), 201u);
  for (const auto& r : rows) {
    EXPECT_EQ(r[4], rows[0][4]);
    EXPECT_EQ(r[5], rows[0][5]);
    EXPECT_NEAR(r[1], r[0] / 1.5 * 0.6, 1e-13);
    EXPECT_NEAR(r[2], r[0] / 1.5 * 0.8, 1e-13);
    EXPECT_EQ(r[7], 1.0);
  }
}

TEST(Commands, TraceFisheyeReturnsToStart) {
  const fs::path out = fresh_dir("trace_fisheye");
  RunOptions opts{out};
  opts.plot = true;
  ASSERT_EQ(run_command("trace", (kScenarios / "fisheye_trace.json").string(), opts), kOk);
  for (const char* id : {"equatorial", "tilted"}) {
    const auto rows = read_csv(out / fmt::format("trajectory_{}.csv", id));
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(rows.back()[k], rows.front()[k], 1e-6) << id << " column " << k;
  }
  EXPECT_TRUE(fs::exists(out / "trajectories.svg"));
}

TEST(Commands, ManifestListsEveryOutputWithItsHash) {
  const fs::path out = fresh_dir("manifest");
  ASSERT_EQ(run_command("trace", (kScenarios / "homogeneous_trace.json").string(), {out}), kOk);
  const std::string manifest = slurp(out / "run_manifest.json");
  std::size_t listed = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    const std::string name = entry.path().filename().string();
    if (name == "run_manifest.json") continue;
    ++listed;
    EXPECT_NE(manifest.find("\"" + name + "\""), std::string::npos) << name;
    EXPECT_NE(manifest.find(git_blob_hash(slurp(entry.path()))), std::string::npos) << name;
  }
  EXPECT_EQ(listed, 2u);
  EXPECT_NE(manifest.find(git_blob_hash(slurp(kScenarios / "homogeneous_trace.json"))), std::string::npos);
  EXPECT_NE(manifest.find("\"config_hash\""), std::string::npos);
}

TEST(Commands, MalformedScenarioWritesNothing) {
  const fs::path out = fresh_dir("malformed");
  EXPECT_EQ(run_command("trace", (kScenarios / "malformed.json").string(), {out}), kUsage);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run_command("trace", (kScenarios / "does_not_exist.json").string(), {out}), kUsage);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Commands, NumericalFailureNamesTheRay) {
  const fs::path dir = fresh_dir("newton");
  fs::create_directories(dir);
  std::ofstream(dir / "s.json") << R"({"schema": 1,
    "medium": {"kind": "fisheye", "n0": 2, "radius": 1, "domain": {"lo": [-4,-4,-4], "hi": [4,4,4]}},
    "integrator": {"scheme": "implicit_midpoint", "dt": 1.0, "newton_max_iter": 1},
    "duration": 3.0, "rays": [{"id": "stiff", "q0": [0.5, 0, 0], "direction": [0, 1, 0]}]})";
  testing::internal::CaptureStderr();
  EXPECT_EQ(run_command("trace", (dir / "s.json").string(), {dir / "out"}), kNumerical);
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("stiff"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Commands, InvalidDirectionIsAUsageError) {
  const fs::path dir = fresh_dir("direction");
  fs::create_directories(dir);
  std::ofstream(dir / "s.json") << R"({"schema": 1,
    "medium": {"kind": "homogeneous", "n0": 1, "domain": {"lo": [-4,-4,-4], "hi": [4,4,4]}},
    "duration": 1.0, "rays": [{"id": "r", "q0": [0, 0, 0], "direction": [1, 1, 0]}]})";
  EXPECT_EQ(run_command("trace", (dir / "s.json").string(), {dir / "out"}), kUsage);
}

TEST(Commands, MeasureZeroDensityGivesZeroEnergy) {
  const fs::path out = fresh_dir("measure_zero");
  ASSERT_EQ(run_command("measure", (kScenarios / "measure_zero.json").string(), {out}), kOk);
  const auto rows = read_csv(out / "measurements.csv");
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_EQ(r[3], 0.0);
}

TEST(Commands, TransportFisheyeConservesEnergy) {
  const fs::path out = fresh_dir("transport");
  ASSERT_EQ(run_command("transport", (kScenarios / "fisheye_transport.json").string(), {out}), kOk);
  const std::string report = slurp(out / "transport_report.json");
  EXPECT_NE(report.find("\"escaped_energy\": 0.0"), std::string::npos) << report;
  EXPECT_NE(report.find("\"total_energy_after\": 1.0"), std::string::npos) << report;
  const Ensemble a = read_ensemble_csv(out / "ensemble_initial.csv");
  const Ensemble b = read_ensemble_csv(out / "ensemble_final.csv");
  ASSERT_EQ(a.particles.size(), 2000u);
  EXPECT_EQ(a.total_energy(), b.total_energy());
}

TEST(Commands, OutputsAreIndependentOfThreadCount) {
  const fs::path one = fresh_dir("threads1"), four = fresh_dir("threads4");
  set_thread_count(1);
  ASSERT_EQ(run_command("transport", (kScenarios / "fisheye_transport.json").string(), {one}), kOk);
  set_thread_count(4);
  ASSERT_EQ(run_command("transport", (kScenarios / "fisheye_transport.json").string(), {four}), kOk);
  set_thread_count(0);
  for (const char* f : {"ensemble_initial.csv", "ensemble_final.csv", "transport_report.json", "run_manifest.json"}) {
    EXPECT_EQ(slurp(one / f), slurp(four / f)) << f;
  }
}

TEST(Commands, SeedOverrideChangesTheEnsemble) {
  const fs::path a = fresh_dir("seed_a"), b = fresh_dir("seed_b");
  RunOptions oa{a}, ob{b};
  oa.seed = 1;
  ob.seed = 2;
  const std::string s = (kScenarios / "fisheye_transport.json").string();
  ASSERT_EQ(run_command("transport", s, oa), kOk);
  ASSERT_EQ(run_command("transport", s, ob), kOk);
  EXPECT_NE(slurp(a / "ensemble_initial.csv"), slurp(b / "ensemble_initial.csv"));
}

TEST(Commands, WignerLadderIsMonotone) {
  const fs::path out = fresh_dir("wigner");
  ASSERT_EQ(run_command("wigner", (kScenarios / "wigner_homogeneous.json").string(), {out}), kOk);
  const auto rows = read_csv(out / "convergence.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LT(rows[1][2], rows[0][2]);
  EXPECT_LT(rows[2][2], rows[1][2]);
}

TEST(Commands, ValidateUnknownSuiteIsAUsageError) {
  const fs::path out = fresh_dir("validate_unknown");
  EXPECT_EQ(run_command("validate", "everything", {out}), kUsage);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Commands, ValidateSymplecticWritesJson) {
  const fs::path out = fresh_dir("validate_symplectic");
  ASSERT_EQ(run_command("validate", "symplectic", {out}), kOk);
  const std::string j = slurp(out / "validate_symplectic.json");
  EXPECT_NE(j.find("symplecticity_defect"), std::string::npos);
  EXPECT_NE(j.find("\"pass\": true"), std::string::npos);
}

TEST(Commands, ValidateToleranceOverrides) {
  const fs::path dir = fresh_dir("tolerances");
  fs::create_directories(dir);
  std::ofstream(dir / "tight.json") << R"({"symplectic.defect": 1e-30})";
  RunOptions opts{dir / "out"};
  opts.tolerances = dir / "tight.json";
  EXPECT_EQ(run_command("validate", "symplectic", opts), kValidationFailure);
  std::ofstream(dir / "bad.json") << R"({"no.such.key": 1})";
  opts.tolerances = dir / "bad.json";
  EXPECT_EQ(run_command("validate", "symplectic", opts), kUsage);
}
