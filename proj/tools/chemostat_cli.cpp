// Command-line front end: solve-eq, run, preset, sweep, compare, ide-check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chemostat/cli/config.hpp"
#include "chemostat/cli/runner.hpp"
#include "chemostat/errors.hpp"

namespace {

using namespace chemostat;
using namespace chemostat::cli;

struct Options {
  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::string golden;
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;
  long stride = 0;
  int jobs = 1;
  std::vector<std::string> axes;
  bool emit_config = false;
  std::string compare_a;
  std::string compare_b;
};

RunConfig selected_config(const Options& o) {
  if (!o.config_path.empty() && !o.preset_name.empty()) {
    throw ConfigValidationError("config", "give either --config or --preset, not both");
  }
  RunConfig c = o.config_path.empty() ? preset(o.preset_name.empty() ? "sim1" : o.preset_name)
                                      : load_config(o.config_path);
  if (o.stride > 0) c.output.stride = o.stride;
  return c;
}

int compare_and_report(const std::string& path, const std::string& golden, const Options& o) {
  const CompareResult res = compare_csv(path, golden, o.tol_rel, o.tol_abs);
  if (res.pass) {
    std::cout << "compare: PASS (" << path << " vs " << golden << ")\n";
    return kExitOk;
  }
  std::cout << "compare: FAIL " << res.message << "\n";
  return kExitCompareFail;
}

int cmd_run(const RunConfig& config, const Options& o) {
  const RunResult result = run(config);
  const std::string csv = write_outputs(config, result, output_dir(config, o.out_dir));
  std::cout << summary_json(result.summary);
  std::cerr << "wrote " << csv << "\n";
  if (!o.golden.empty()) return compare_and_report(csv, o.golden, o);
  return kExitOk;
}

int cmd_solve_eq(const RunConfig& config) {
  const ResolvedRun r = resolve(config);
  const nlohmann::json doc{{"d_star", r.equilibrium.d_star},
                           {"beta", r.equilibrium.beta},
                           {"y_star", r.equilibrium.y_star},
                           {"f_star_0", r.equilibrium.f_star.values.front()},
                           {"lotka_sharpe_residual", lotka_sharpe_residual(r.equilibrium.d_star, r.params)}};
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, const Options& o) {
  std::vector<SweepAxis> axes;
  for (const auto& spec : o.axes) axes.push_back(parse_axis(spec));
  if (axes.empty()) throw ConfigValidationError("axis", "sweep needs at least one --axis");
  const auto rows = sweep(config, axes, o.jobs);
  const std::string table = sweep_csv(axes, rows);
  const std::filesystem::path dir(output_dir(config, o.out_dir));
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "sweep.csv", std::ios::binary) << table;
  std::cout << table;
  const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.summary.has_value(); });
  return any_ok ? kExitOk : kExitNumerical;
}

int cmd_ide_check(const RunConfig& config) {
  const IdeReport rep = ide_check(config);
  std::cout << rep.json;
  return rep.passed ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-structured chemostat simulator with sampled dilution feedback"};
  app.require_subcommand(1);
  Options o;

  auto add_source = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset_name, "Scenario preset (sim1, sim2, sim3_newborn, sim3_output, openloop)");
    sub->add_option("--stride", o.stride, "Record every N-th step")->check(CLI::PositiveNumber);
  };
  auto add_tolerances = [&](CLI::App* sub) {
    sub->add_option("--tol-rel", o.tol_rel, "Relative tolerance")->capture_default_str();
    sub->add_option("--tol-abs", o.tol_abs, "Absolute tolerance")->capture_default_str();
  };

  auto* solve_eq = app.add_subcommand("solve-eq", "Solve the Lotka-Sharpe equation and print the equilibrium");
  add_source(solve_eq);

  auto* run_cmd = app.add_subcommand("run", "Run a simulation and write CSV and summary");
  add_source(run_cmd);
  run_cmd->add_option("--out", o.out_dir, "Output directory");
  run_cmd->add_option("--golden", o.golden, "Compare the CSV against this golden file");
  add_tolerances(run_cmd);

  auto* preset_cmd = app.add_subcommand("preset", "Run a named preset, or print its config");
  preset_cmd->add_option("name", o.preset_name, "Preset name")->required();
  preset_cmd->add_flag("--emit-config", o.emit_config, "Print the preset's JSON config and exit");
  preset_cmd->add_option("--out", o.out_dir, "Output directory");
  preset_cmd->add_option("--stride", o.stride, "Record every N-th step")->check(CLI::PositiveNumber);
  preset_cmd->add_option("--golden", o.golden, "Compare the CSV against this golden file");
  add_tolerances(preset_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  add_source(sweep_cmd);
  sweep_cmd->add_option("--axis", o.axes, "Axis spec name=v1,v2,... (T, bias, b0, c, theta)")->required();
  sweep_cmd->add_option("--jobs", o.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", o.out_dir, "Output directory");

  auto* compare_cmd = app.add_subcommand("compare", "Compare a CSV against a golden CSV");
  compare_cmd->add_option("csv", o.compare_a, "CSV to check")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--golden", o.golden, "Golden CSV")->required()->check(CLI::ExistingFile);
  add_tolerances(compare_cmd);

  auto* ide_cmd = app.add_subcommand("ide-check", "IDE cross-validation and ergodicity diagnostics");
  add_source(ide_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*compare_cmd) return compare_and_report(o.compare_a, o.golden, o);
    if (*preset_cmd && o.emit_config) {
      std::cout << serialize_config(preset(o.preset_name));
      return kExitOk;
    }
    const RunConfig config = selected_config(o);
    if (*solve_eq) return cmd_solve_eq(config);
    if (*run_cmd || *preset_cmd) return cmd_run(config, o);
    if (*sweep_cmd) return cmd_sweep(config, o);
    if (*ide_cmd) return cmd_ide_check(config);
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonPositiveProfile& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
