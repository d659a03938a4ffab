#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "doctest.h"
#include "fuse/units.hpp"
#include "runner.hpp"

using namespace fuse;
using namespace fuse::cli;

namespace {

std::vector<ConfigIssue> issues_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool has_path(const std::vector<ConfigIssue>& issues, std::string_view path) {
  return std::any_of(issues.begin(), issues.end(), [&](const ConfigIssue& i) { return i.path == path; });
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const RunConfig c = parse_config(R"(
[scenario]
kind = "static"
wavelength_nm = 1548.292
powers_dbm = [0, 10]
)");
  CHECK(c.name == "run");
  CHECK(c.device.q_loaded == 6.6e4);
  CHECK(c.scenario.kind == ScenarioKind::static_power);
  CHECK(c.scenario.powers_dbm == std::vector<double>{0.0, 10.0});
  CHECK(c.scenario.wavelength_m == doctest::Approx(1548.292e-9).epsilon(1e-15));
  CHECK(c.source.shape == source::Shape::delta);
  CHECK(c.pr.dt_s == 0.01);
  CHECK_FALSE(c.pr.model.has_value());
  CHECK(c.qkd.calibrate);
  CHECK(c.output.dir == "out");
  CHECK(c.output_file() == "run.csv");
}

TEST_CASE("a missing scenario is reported at its path") {
  const auto issues = issues_of("name = \"x\"\n");
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].path == "scenario");
  CHECK(has_path(issues_of("[scenario]\n"), "scenario.kind"));
  CHECK(has_path(issues_of("[scenario]\nkind = \"warp\"\n"), "scenario.kind"));
}

TEST_CASE("all errors are collected with their key paths") {
  const auto issues = issues_of(R"(
name = 3
surprise = true
[device]
q_loaded = -1
fsr_ghz = "50 nm"
[source]
shape = "square"
[scenario]
kind = "static"
wavelength_nm = 1548.292
bogus = 1
)");
  CHECK(issues.size() >= 5);
  CHECK(has_path(issues, "name"));
  CHECK(has_path(issues, "surprise"));
  CHECK(has_path(issues, "device"));
  CHECK(has_path(issues, "device.fsr_ghz"));
  CHECK(has_path(issues, "scenario.powers_dbm"));
  CHECK(has_path(issues, "scenario.bogus"));
  try {
    parse_config("[scenario]\nkind = \"static\"\nbogus = 1\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("scenario.bogus") != std::string::npos);
  }
}

TEST_CASE("quoted values carry units that must match the key") {
  const RunConfig ok = parse_config(R"(
[device]
fsr_ghz = "50 GHz"
[scenario]
kind = "static"
wavelength_nm = "1548.292 nm"
powers_dbm = ["0 dBm"]
)");
  CHECK(ok.scenario.wavelength_m == doctest::Approx(1548.292e-9).epsilon(1e-15));
  CHECK(ok.device.nominal_fsr_hz == doctest::Approx(50e9));

  const auto bad = issues_of(R"(
[scenario]
kind = "static"
wavelength_nm = "1548.292 pm"
powers_dbm = ["0 mW"]
)");
  REQUIRE(bad.size() >= 2);
  CHECK(bad[0].message.find("unit mismatch") != std::string::npos);
  CHECK(has_path(bad, "scenario.wavelength_nm"));
  CHECK(has_path(bad, "scenario.powers_dbm"));
  CHECK(has_path(issues_of("[scenario]\nkind = \"static\"\nwavelength_nm = \"abc\"\npowers_dbm = [0]\n"),
                 "scenario.wavelength_nm"));
}

TEST_CASE("grids: list or range, never both") {
  const RunConfig c = parse_config(R"(
[scenario]
kind = "skr-distance"
powers_dbm = [0]
distance_start_km = 0
distance_stop_km = 10
distance_step_km = 2.5
)");
  CHECK(c.scenario.distances_km == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
  CHECK(has_path(issues_of(R"(
[scenario]
kind = "static"
powers_dbm = [0]
power_start_dbm = 0
power_stop_dbm = 1
power_step_db = 1
)"),
                 "scenario.powers_dbm"));
  CHECK(has_path(issues_of("[scenario]\nkind = \"skr-distance\"\npowers_dbm = [0]\ndistances_km = [-1]\n"),
                 "scenario.distances_km"));

  CHECK(inclusive_range(-35.0, 10.0, 1.0).size() == 46);
  CHECK(inclusive_range(1.0, 1.0, 1.0) == std::vector<double>{1.0});
  CHECK_THROWS_AS(inclusive_range(0.0, 1.0, 0.3), ValidationError);
  CHECK_THROWS_AS(inclusive_range(1.0, 0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(inclusive_range(0.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("conflicting settings are flagged") {
  CHECK(has_path(issues_of(R"(
[qkd]
detector_efficiency = 0.1
[scenario]
kind = "skr-power"
powers_dbm = [0]
)"),
                 "qkd.detector_efficiency"));
  const auto pr = issues_of(R"(
[pr]
max_shift_ghz = 9
[scenario]
kind = "static"
powers_dbm = [0]
)");
  CHECK_FALSE(pr.empty());
  CHECK(pr[0].path.starts_with("pr"));
  CHECK(has_path(issues_of("[pr]\nanchors_file = \"/nonexistent/anchors.csv\"\n[scenario]\nkind = \"static\"\n"
                           "powers_dbm = [0]\n"),
                 "pr.anchors_file"));
  CHECK(has_path(issues_of("[output]\nfile = \"a/b.csv\"\n[scenario]\nkind = \"static\"\npowers_dbm = [0]\n"),
                 "output.file"));
  CHECK(has_path(issues_of(R"(
[scenario]
kind = "timeseries"
power_dbm = 0
schedule_s = [[5, 65]]
duration_s = 60
)"),
                 "scenario.duration_s"));
  CHECK(has_path(issues_of(R"(
[scenario]
kind = "sweep"
span_pm = 400
step_pm = 30
)"),
                 "scenario"));
}

TEST_CASE("TOML syntax errors carry a location") {
  const auto issues = issues_of("[scenario\nkind = 1\n");
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].path.find(":1:") != std::string::npos);
}

TEST_CASE("presets") {
  const std::vector<std::string> want{"fig2b", "fig3a", "fig3b", "fig3c", "fig3d",
                                      "fig4b", "fig4c", "fig5a", "fig5b"};
  CHECK(preset_names() == want);
  for (const auto& n : want) {
    const RunConfig c = preset_config(n);
    CHECK(c.name == n);
    CHECK(c.output_file() == n + ".csv");
  }
  CHECK_THROWS_AS(preset_config("fig9"), ConfigError);

  const RunConfig c4 = preset_config("fig4c");
  CHECK(c4.scenario.kind == ScenarioKind::sweep);
  CHECK(c4.scenario.sweep.span_m == doctest::Approx(400e-12));
  CHECK(c4.scenario.sweep.step_m == doctest::Approx(20e-12));
  CHECK(watts_to_dbm(c4.scenario.sweep.target_tx_power_w) == doctest::Approx(-20.0));
  CHECK(c4.source.fwhm_hz == 10e9);
  CHECK(c4.scenario.sweep.grid().size() == 21);

  const RunConfig c3 = preset_config("fig3c");
  REQUIRE(c3.scenario.schedule.size() == 1);
  CHECK(c3.scenario.schedule[0].on_s == 5.0);
  CHECK(c3.scenario.schedule[0].off_s == 65.0);
  CHECK(preset_config("fig3b").scenario.powers_dbm.size() == 46);
  CHECK(preset_config("fig5b").scenario.distances_km.size() == 101);
}

TEST_CASE("a config can start from a preset and override sections") {
  const RunConfig c = parse_config(R"(
preset = "fig4c"
name = "narrow"
[scenario]
tx_dbm = -30
)");
  CHECK(c.name == "narrow");
  CHECK(c.scenario.kind == ScenarioKind::sweep);
  CHECK(watts_to_dbm(c.scenario.sweep.target_tx_power_w) == doctest::Approx(-30.0));
  CHECK(c.scenario.sweep.span_m == doctest::Approx(400e-12));
  CHECK(has_path(issues_of("preset = \"nope\"\n"), "preset"));
}

TEST_CASE("anchors file resolves against the config directory") {
  const auto dir = std::filesystem::temp_directory_path() / "fuse_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "anchors.csv") << "power_dbm,kind,value\n0,shift_pm,34.5\n10,atten_db_cw,14.02\n";
    std::ofstream(dir / "run.toml") << "[pr]\nanchors_file = \"anchors.csv\"\n[scenario]\nkind = \"static\"\n"
                                       "powers_dbm = [0]\n";
  }
  const RunConfig c = parse_config_file(dir / "run.toml");
  REQUIRE(c.pr.anchors_file.has_value());
  CHECK(*c.pr.anchors_file == dir / "anchors.csv");
  const Table t = simulate(c);
  CHECK(t.rows.at(0).at(5) == doctest::Approx(34.5).epsilon(1e-4));
  CHECK_THROWS_AS(parse_config_file(dir / "missing.toml"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("render_csv: schema line, header, full precision, deterministic") {
  const Table t{"demo", {"a", "b"}, {{1.0, 0.1}, {-INFINITY, 1e-300}}, {}};
  const std::string csv = render_csv(t);
  CHECK(csv ==
        "# schema: demo v1\n"
        "a,b\n"
        "1.0000000000000000e+00,1.0000000000000001e-01\n"
        "-inf,1.0000000000000000e-300\n");
  const RunConfig c = preset_config("fig3d");
  CHECK(render_csv(simulate(c)) == render_csv(simulate(c)));
}

TEST_CASE("simulate: static table layout") {
  const RunConfig c = parse_config(R"(
[scenario]
kind = "static"
wavelength_nm = 1548.292
powers_dbm = [0, 10]
)");
  const Table t = simulate(c);
  CHECK(t.schema == "attack");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.columns.size() == t.rows[0].size());
  CHECK(t.rows[0][2] == 0.0);
  CHECK(t.rows[1][4] == doctest::Approx(14.02).epsilon(1e-4));
  CHECK(t.rows[1][6] == 1.0);
}

TEST_CASE("write_atomic replaces the file and leaves no temporary") {
  const auto dir = std::filesystem::temp_directory_path() / "fuse_atomic_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  const auto path = dir / "x.csv";
  write_atomic(path, "one\n");
  write_atomic(path, "two\n");
  CHECK(slurp(path) == "two\n");
  CHECK_FALSE(std::filesystem::exists(dir / "x.csv.tmp"));
  std::filesystem::remove_all(dir.parent_path());
}
