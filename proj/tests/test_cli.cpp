#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chemostat/cli/config.hpp"
#include "chemostat/cli/runner.hpp"

using namespace chemostat;
using namespace chemostat::cli;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "chemostat_cli_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("presets round-trip through JSON") {
  for (const auto& name : preset_names()) {
    const RunConfig c = preset(name);
    CHECK(parse_config(serialize_config(c)) == c);
  }
  CHECK_THROWS_AS(preset("sim9"), ConfigValidationError);
}

TEST_CASE("validation errors carry field paths") {
  const std::string text = serialize_config(preset("sim1"));
  try {
    parse_config(replace(text, "\"T\": 0.4", "\"T\": 0.41"));
    FAIL("expected ConfigValidationError");
  } catch (const ConfigValidationError& e) {
    CHECK(e.field() == "model.T");
    CHECK(std::string(e.what()).find("T/h not integer") != std::string::npos);
  }
  try {
    parse_config(replace(text, "\"D_min\": 0.5,", ""));
    FAIL("expected ConfigValidationError");
  } catch (const ConfigValidationError& e) {
    CHECK(e.field() == "model.D_min");
  }
  try {
    parse_config(replace(text, "\"t_end\": 40.0", "\"t_end\": 40.01"));
    FAIL("expected ConfigValidationError");
  } catch (const ConfigValidationError& e) {
    CHECK(e.field() == "grid.t_end");
  }
  try {
    parse_config(replace(text, "\"variant\": \"output_feedback\"", "\"variant\": \"pid\""));
    FAIL("expected ConfigValidationError");
  } catch (const ConfigValidationError& e) {
    CHECK(e.field() == "controller.variant");
  }
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigParseError);
}

TEST_CASE("explicit d_star and tables") {
  RunConfig c = preset("sim1");
  c.controller.d_star_used = 0.9;
  c.model.triangular_scale.reset();
  const double g = triangular_birth_scale(0.1, 1.0);
  c.model.birth = {{0.0, 1.0, 2.0}, {0.0, g, 0.0}};
  const RunConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
  const ResolvedRun r = resolve(back);
  CHECK(r.controller.d_star_used == 0.9);
  CHECK(std::abs(r.equilibrium.d_star - 1.0) < 1e-8);
}

TEST_CASE("scenario-3 presets settle at the shifted set point") {
  for (const char* name : {"sim3_newborn", "sim3_output"}) {
    const RunSummary s = run(preset(name)).summary;
    CHECK(std::abs(s.final_boundary / 1.1275 - 1.0) < 0.01);
    CHECK(std::abs(s.final_d - 1.0) < 0.01);
  }
  const RunSummary open = run(preset("openloop")).summary;
  CHECK(open.final_w <= 1e-9);
}

TEST_CASE("run output is deterministic and compare detects perturbations") {
  const auto dir = scratch("determinism");
  RunConfig c = preset("sim1");
  c.grid.t_end = 8.0;
  const RunResult a = run(c);
  const std::string csv_a = write_outputs(c, a, (dir / "a").string());
  const std::string csv_b = write_outputs(c, run(c), (dir / "b").string());
  CHECK(read(csv_a) == read(csv_b));
  CHECK(read(csv_a).rfind("step,t,D,f_boundary,y,w,ratio_min,ratio_max\n", 0) == 0);
  CHECK(compare_csv(csv_a, csv_a, 0.0, 0.0).pass);

  // perturb one value of row 37 by 10x the tolerance
  std::istringstream lines(read(csv_a));
  std::ostringstream out;
  std::string line;
  int row = -1;
  while (std::getline(lines, line)) {
    if (row == 37) {
      auto cells = line;
      const auto pos = cells.find(',', cells.find(',', cells.find(',') + 1) + 1);  // after D
      const auto end = cells.find(',', pos + 1);
      const double v = std::stod(cells.substr(pos + 1, end - pos - 1));
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v * (1.0 + 1e-5));
      line = cells.substr(0, pos + 1) + buf + cells.substr(end);
    }
    out << line << "\n";
    ++row;
  }
  const auto golden = dir / "golden.csv";
  std::ofstream(golden, std::ios::binary) << out.str();
  const CompareResult res = compare_csv(csv_a, golden.string(), 1e-6, 0.0);
  CHECK(!res.pass);
  CHECK(res.row == 38);
  CHECK(res.column == "f_boundary");
}

TEST_CASE("sweeps") {
  RunConfig base = preset("sim3_output");
  base.grid.t_end = 40.0;
  const auto rows = sweep(base, {parse_axis("bias=0.7,1.0,1.3")}, 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].point[0] == 0.7);
  CHECK(rows[2].point[0] == 1.3);
  CHECK(std::abs(rows[0].summary->final_boundary / 1.1275 - 1.0) < 0.01);
  CHECK(std::abs(rows[1].summary->final_boundary - 1.0) < 1e-3);

  // a single-point sweep reproduces run
  const auto single = sweep(base, {parse_axis("T=0.4")}, 1);
  CHECK(single[0].summary->final_y == run(base).summary.final_y);

  // failures land in the error column without stopping the sweep
  const auto mixed = sweep(base, {parse_axis("T=0.41,0.8")}, 2);
  CHECK(!mixed[0].summary);
  CHECK(mixed[0].error.find("T/h not integer") != std::string::npos);
  CHECK(mixed[1].summary);
  const std::string table = sweep_csv({parse_axis("T=0.41,0.8")}, mixed);
  CHECK(table.rfind("T,final_t", 0) == 0);

  CHECK_THROWS_AS(parse_axis("gain=1,2"), ConfigValidationError);
  CHECK_THROWS_AS(parse_axis("T=0.4,x"), ConfigValidationError);
}

TEST_CASE("ide-check report passes for the presets") {
  for (const char* name : {"sim1", "sim2"}) {
    const IdeReport rep = ide_check(preset(name));
    CHECK(rep.passed);
    CHECK(rep.json.find("\"cross_validation\"") != std::string::npos);
  }
}

TEST_CASE("output directory selection") {
  RunConfig c = preset("sim1");
  CHECK(output_dir(c, "explicit") == "explicit");
  ::setenv("CHEMOSTAT_OUT_DIR", "/tmp/root", 1);
  CHECK(output_dir(c, "") == "/tmp/root/sim1");
  ::unsetenv("CHEMOSTAT_OUT_DIR");
  CHECK(output_dir(c, "") == "out/sim1");
}
