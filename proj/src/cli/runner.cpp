#include "chemostat/cli/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "chemostat/ide.hpp"
#include "chemostat/metrics.hpp"

namespace chemostat::cli {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigParseError("cannot write file: " + path.string());
  out << text;
}

json number_or_null(std::optional<double> x) { return x && std::isfinite(*x) ? json(*x) : json(nullptr); }

}  // namespace

RunResult run(const RunConfig& config) {
  const ResolvedRun r = resolve(config);
  std::vector<double> times;
  std::vector<double> w;
  SimOptions options;
  options.stride = config.output.stride;
  double max_w = 0.0;
  options.observer = [&](const SimState&, const StepRecord& rec) {
    times.push_back(rec.t);
    w.push_back(rec.w);
    max_w = std::max(max_w, rec.w);
  };
  RunResult out;
  out.series = run_simulation(r.params, r.grid, r.equilibrium, r.controller, r.initial, config.grid.t_end, options);

  RunSummary& s = out.summary;
  const StepRecord& last = out.series.back();
  s.name = config.name;
  s.d_star = r.equilibrium.d_star;
  s.d_used = r.controller.d_star_used;
  s.reference = r.controller.reference;
  s.final_t = last.t;
  s.final_d = last.d;
  s.final_boundary = last.f_boundary;
  s.final_y = last.y;
  s.final_w = last.w;
  s.max_w = max_w;
  const auto fit = metrics::fit_decay_rate(times, w, r.params.horizon);
  if (!fit.degenerate) s.decay_rate = fit.rate;
  return out;
}

std::string timeseries_csv(const TimeSeries& series) {
  std::string out = "step,t,D,f_boundary,y,w,ratio_min,ratio_max\n";
  for (const auto& r : series.rows) {
    out += std::to_string(r.step);
    for (double x : {r.t, r.d, r.f_boundary, r.y, r.w, r.ratio_min, r.ratio_max}) {
      out += ',';
      out += fmt(x);
    }
    out += '\n';
  }
  return out;
}

std::string summary_json(const RunSummary& s) {
  const json doc{{"name", s.name},
                 {"d_star", s.d_star},
                 {"d_star_used", s.d_used},
                 {"reference", s.reference},
                 {"final_t", s.final_t},
                 {"final_D", s.final_d},
                 {"final_f_boundary", s.final_boundary},
                 {"final_y", s.final_y},
                 {"final_w", s.final_w},
                 {"max_abs_log_ratio", s.max_w},
                 {"decay_rate", number_or_null(s.decay_rate)}};
  return doc.dump(2) + "\n";
}

std::string output_dir(const RunConfig& config, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (const char* root = std::getenv("CHEMOSTAT_OUT_DIR"); root && *root) {
    return (std::filesystem::path(root) / config.name).string();
  }
  return config.output.dir;
}

std::string write_outputs(const RunConfig& config, const RunResult& result, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  const auto csv = root / config.output.csv;
  write_file(csv, timeseries_csv(result.series));
  write_file(root / config.output.summary, summary_json(result.summary));
  return csv.string();
}

CompareResult compare_csv(const std::string& path, const std::string& golden_path, double tol_rel, double tol_abs) {
  const auto a = read_lines(path);
  const auto b = read_lines(golden_path);
  CompareResult res;
  if (a.empty() || b.empty() || a.front() != b.front()) {
    res.row = 0;
    res.message = "headers differ";
    return res;
  }
  const auto header = split(b.front(), ',');
  if (a.size() != b.size()) {
    res.row = static_cast<long>(std::min(a.size(), b.size()));
    std::ostringstream msg;
    msg << "row counts differ (" << a.size() - 1 << " vs golden " << b.size() - 1 << ")";
    res.message = msg.str();
    return res;
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto ra = split(a[i], ',');
    const auto rb = split(b[i], ',');
    if (ra.size() != header.size() || rb.size() != header.size()) {
      res.row = static_cast<long>(i);
      res.message = "wrong number of columns";
      return res;
    }
    for (std::size_t k = 0; k < header.size(); ++k) {
      const double x = std::strtod(ra[k].c_str(), nullptr);
      const double y = std::strtod(rb[k].c_str(), nullptr);
      const bool same = (std::isnan(x) && std::isnan(y)) || std::abs(x - y) <= tol_abs + tol_rel * std::abs(y);
      if (!same) {
        res.row = static_cast<long>(i);
        res.column = header[k];
        std::ostringstream msg;
        msg << "first divergence at row " << i << ", column " << header[k] << ": " << ra[k] << " vs golden "
            << rb[k];
        res.message = msg.str();
        return res;
      }
    }
  }
  res.pass = true;
  res.message = "match";
  return res;
}

SweepAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigValidationError("axis", "expected name=v1,v2,...");
  SweepAxis axis;
  axis.name = spec.substr(0, eq);
  static const std::vector<std::string> known{"T", "bias", "b0", "c", "theta"};
  if (std::find(known.begin(), known.end(), axis.name) == known.end()) {
    throw ConfigValidationError("axis", "unknown axis '" + axis.name + "' (T, bias, b0, c, theta)");
  }
  for (const auto& item : split(spec.substr(eq + 1), ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(v)) {
      throw ConfigValidationError("axis", "bad value '" + item + "' in axis " + axis.name);
    }
    axis.values.push_back(v);
  }
  if (axis.values.empty()) throw ConfigValidationError("axis", "axis " + axis.name + " has no values");
  return axis;
}

RunConfig with_axis_value(RunConfig config, const std::string& axis, double value) {
  if (axis == "T") {
    config.model.period = value;
  } else if (axis == "bias") {
    config.controller.bias = value;
  } else if (axis == "b0" || axis == "c" || axis == "theta") {
    if (config.initial.kind != InitialBlock::Kind::family) {
      throw ConfigValidationError("initial", "axis " + axis + " needs the {b0, c, theta} initial family");
    }
    (axis == "b0" ? config.initial.b0 : axis == "c" ? config.initial.c : config.initial.theta) = value;
  } else {
    throw ConfigValidationError("axis", "unknown axis '" + axis + "'");
  }
  return config;
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<SweepAxis>& axes, int jobs) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  std::vector<SweepRow> rows(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    rows[i].point.resize(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      rows[i].point[k] = axes[k].values[rest % axes[k].values.size()];
      rest /= axes[k].values.size();
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      SweepRow& row = rows[i];
      try {
        RunConfig c = base;
        for (std::size_t k = 0; k < axes.size(); ++k) c = with_axis_value(std::move(c), axes[k].name, row.point[k]);
        resolve(c);
        row.summary = run(c).summary;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows) {
  std::string out;
  for (const auto& a : axes) out += a.name + ",";
  out += "final_t,final_D,final_f_boundary,final_y,final_w,max_abs_log_ratio,decay_rate,error\n";
  for (const auto& r : rows) {
    for (double v : r.point) out += fmt(v) + ",";
    if (r.summary) {
      const RunSummary& s = *r.summary;
      for (double x : {s.final_t, s.final_d, s.final_boundary, s.final_y, s.final_w, s.max_w}) out += fmt(x) + ",";
      out += s.decay_rate ? fmt(*s.decay_rate) : std::string("inf");
      out += ",";
    } else {
      out += ",,,,,,,";
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out += "\"" + msg + "\"";
    }
    out += '\n';
  }
  return out;
}

IdeReport ide_check(const RunConfig& config) {
  const ResolvedRun r = resolve(config);
  const double h = r.grid.step();
  const double d_star = r.equilibrium.d_star;
  const double horizon = r.params.horizon;
  const double t_check = h * std::ceil(std::max(10.0, 3.0 * horizon) / h - 1e-9);
  const auto& f0 = r.initial.values;
  auto at_node = [&](double a) { return f0[static_cast<std::size_t>(std::lround(a / h))]; };

  // unit-mass form: stored values are exp(-D* t) v(t), comparable to f(t, 0) at D = D*
  const ide::IdeProblem normalized = ide::problem_from_model(r.params, r.grid, at_node, d_star);
  const ide::IdeSolution sol = ide::solve_ide(normalized, t_check);

  ControllerSpec open = r.controller;
  open.variant = ControlVariant::open_loop;
  open.d_star_used = d_star;
  const TimeSeries pde = run_simulation(r.params, r.grid, r.equilibrium, open, r.initial, t_check);
  double cross_gap = 0.0;
  for (const auto& row : pde.rows) {
    const double v = sol.at(row.step);
    cross_gap = std::max(cross_gap, std::abs(v - row.f_boundary) / std::abs(row.f_boundary));
  }

  const double p_continuous = ide::ergodic_projection(r.initial, r.params, d_star, r.grid);
  const double p_discrete = ide::discrete_projection(normalized);
  const auto diag = ide::phi_and_decay(sol, d_star, p_discrete, horizon);
  const double bound_c = ide::renewal_bound_constant(normalized.kernel, d_star);
  const auto renewal = ide::verify_renewal_bound(diag, r.grid, d_star, bound_c);

  // envelope of the undiluted equation, rescaled when its kernel mass is below 1
  ide::IdeProblem raw = ide::problem_from_model(r.params, r.grid, at_node, 0.0);
  const double p_shift = ide::envelope_rescaling(raw.kernel);
  if (p_shift > 0.0) raw = ide::rescaled_problem(raw, p_shift);
  json bracket;
  bool bracket_ok = false;
  try {
    const auto constants = ide::split_constants(raw.kernel, ide::admissible_split(raw.kernel));
    const auto raw_sol = ide::solve_ide(raw, t_check);
    const auto rep = ide::verify_split_envelope(raw, raw_sol, constants);
    bracket_ok = rep.holds;
    bracket = {{"mass", constants.mass},       {"split", constants.split},
             {"split_mass", constants.split_mass}, {"growth", constants.growth},
             {"rescaling", p_shift},          {"worst_violation", rep.worst_violation},
             {"holds", rep.holds}};
  } catch (const Error& e) {
    bracket = {{"error", e.what()}};
  }

  const bool decay_ok = diag.degenerate || diag.eps_fit > 0.0;
  IdeReport out;
  out.passed = cross_gap <= 1e-3 && renewal.holds && bracket_ok && decay_ok;
  const json doc{{"name", config.name},
                 {"d_star", d_star},
                 {"t_check", t_check},
                 {"cross_validation", {{"max_relative_gap", cross_gap}, {"tolerance", 1e-3}}},
                 {"projection", {{"continuous", p_continuous}, {"discrete", p_discrete}}},
                 {"decay",
                  {{"degenerate", diag.degenerate},
                   {"eps_fit", number_or_null(diag.eps_fit)},
                   {"k_fit", diag.k_fit},
                   {"samples", diag.fit.samples}}},
                 {"renewal_bound", {{"constant", bound_c}, {"worst_excess", renewal.worst_excess}, {"holds", renewal.holds}}},
                 {"envelope", bracket},
                 {"passed", out.passed}};
  out.json = doc.dump(2) + "\n";
  return out;
}

}  // namespace chemostat::cli
