#include "chemostat/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chemostat/pde_sim.hpp"

namespace chemostat::cli {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw ConfigValidationError(field, message);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) invalid(path.empty() ? key : path + "." + key, "missing required field");
  return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_number()) invalid(join(path, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(join(path, key), "must be finite");
  return x;
}

const json& object(const json& obj, const std::string& key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_object()) invalid(join(path, key), "must be an object");
  return v;
}

std::vector<double> number_array(const json& v, const std::string& field) {
  if (!v.is_array()) invalid(field, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) invalid(field, "must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Table constant_table(double value, double horizon) { return {{0.0, horizon}, {value, value}}; }

Table parse_table(const json& v, const std::string& field, double horizon) {
  if (v.is_number()) return constant_table(v.get<double>(), horizon);
  if (!v.is_object()) invalid(field, "must be a number or {\"knots\", \"values\"}");
  Table t{number_array(member(v, "knots", field), join(field, "knots")),
          number_array(member(v, "values", field), join(field, "values"))};
  if (t.knots.size() != t.values.size() || t.knots.size() < 2) {
    invalid(field, "knots and values must have equal length >= 2");
  }
  return t;
}

json table_json(const Table& t) {
  if (t.knots.size() == 2 && t.values[0] == t.values[1]) return t.values[0];
  return json{{"knots", t.knots}, {"values", t.values}};
}

PiecewiseLinear to_function(const Table& t, const std::string& field) {
  try {
    return PiecewiseLinear(t.knots, t.values);
  } catch (const Error& e) {
    invalid(field, e.what());
  }
}

ModelBlock parse_model(const json& m) {
  ModelBlock b;
  b.horizon = number(m, "A", "model");
  if (!(b.horizon > 0.0)) invalid("model.A", "must be positive");
  b.mortality = parse_table(member(m, "mu", "model"), "model.mu", b.horizon);
  const json& k = member(m, "k", "model");
  if (k.is_object() && k.contains("triangular")) {
    b.triangular_scale = number(k, "triangular", "model.k");
  } else {
    b.birth = parse_table(k, "model.k", b.horizon);
  }
  b.output_weight = parse_table(member(m, "p", "model"), "model.p", b.horizon);
  b.d_min = number(m, "D_min", "model");
  b.d_max = number(m, "D_max", "model");
  b.period = number(m, "T", "model");
  b.scale = number(m, "M", "model");
  return b;
}

ControllerBlock parse_controller(const json& c) {
  ControllerBlock b;
  const json& variant = member(c, "variant", "controller");
  if (!variant.is_string()) invalid("controller.variant", "must be a string");
  try {
    b.variant = parse_variant(variant.get<std::string>());
  } catch (const Error& e) {
    invalid("controller.variant", e.what());
  }
  const json& used = member(c, "d_star_used", "controller");
  if (used.is_string()) {
    if (used.get<std::string>() != "auto") invalid("controller.d_star_used", "must be a number or \"auto\"");
  } else {
    b.d_star_used = number(c, "d_star_used", "controller");
  }
  if (c.contains("bias")) b.bias = number(c, "bias", "controller");
  if (!(b.bias > 0.0)) invalid("controller.bias", "must be positive");
  return b;
}

InitialBlock parse_initial(const json& i) {
  InitialBlock b;
  if (i.contains("table")) {
    b.kind = InitialBlock::Kind::table;
    b.table = number_array(i.at("table"), "initial.table");
  } else if (i.contains("equilibrium")) {
    if (!i.at("equilibrium").is_boolean() || !i.at("equilibrium").get<bool>()) {
      invalid("initial.equilibrium", "must be true");
    }
    b.kind = InitialBlock::Kind::equilibrium;
  } else {
    b.kind = InitialBlock::Kind::family;
    b.b0 = number(i, "b0", "initial");
    b.c = number(i, "c", "initial");
    b.theta = number(i, "theta", "initial");
  }
  return b;
}

OutputBlock parse_output(const json& o) {
  OutputBlock b;
  if (o.contains("dir")) b.dir = o.at("dir").get<std::string>();
  if (o.contains("csv")) b.csv = o.at("csv").get<std::string>();
  if (o.contains("summary")) b.summary = o.at("summary").get<std::string>();
  if (o.contains("stride")) {
    const json& s = o.at("stride");
    if (!s.is_number_integer() || s.get<long>() < 1) invalid("output.stride", "must be an integer >= 1");
    b.stride = s.get<long>();
  }
  return b;
}

// Field path of a library error message of the form "model.X: ...".
std::string field_of(const std::string& message, const std::string& fallback) {
  const auto colon = message.find(':');
  if (colon == std::string::npos || message.compare(0, 6, "model.") != 0) return fallback;
  return message.substr(0, colon);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigParseError("config must be a JSON object");
  RunConfig c;
  try {
    if (doc.contains("name")) c.name = doc.at("name").get<std::string>();
    c.model = parse_model(object(doc, "model", ""));
    const json& g = object(doc, "grid", "");
    c.grid.step = number(g, "h", "grid");
    c.grid.t_end = number(g, "t_end", "grid");
    c.controller = parse_controller(object(doc, "controller", ""));
    c.initial = parse_initial(object(doc, "initial", ""));
    if (doc.contains("output")) c.output = parse_output(object(doc, "output", ""));
  } catch (const json::type_error& e) {
    throw ConfigValidationError("config", e.what());
  }
  resolve(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  json model{{"A", c.model.horizon},
             {"mu", table_json(c.model.mortality)},
             {"p", table_json(c.model.output_weight)},
             {"D_min", c.model.d_min},
             {"D_max", c.model.d_max},
             {"T", c.model.period},
             {"M", c.model.scale}};
  model["k"] = c.model.triangular_scale ? json{{"triangular", *c.model.triangular_scale}}
                                        : json{{"knots", c.model.birth.knots}, {"values", c.model.birth.values}};
  json controller{{"variant", std::string(to_string(c.controller.variant))}, {"bias", c.controller.bias}};
  controller["d_star_used"] = c.controller.d_star_used ? json(*c.controller.d_star_used) : json("auto");
  json initial;
  switch (c.initial.kind) {
    case InitialBlock::Kind::family: initial = {{"b0", c.initial.b0}, {"c", c.initial.c}, {"theta", c.initial.theta}}; break;
    case InitialBlock::Kind::table: initial = {{"table", c.initial.table}}; break;
    case InitialBlock::Kind::equilibrium: initial = {{"equilibrium", true}}; break;
  }
  const json doc{{"name", c.name},
                 {"model", model},
                 {"grid", {{"h", c.grid.step}, {"t_end", c.grid.t_end}}},
                 {"controller", controller},
                 {"initial", initial},
                 {"output",
                  {{"dir", c.output.dir}, {"csv", c.output.csv}, {"summary", c.output.summary}, {"stride", c.output.stride}}}};
  return doc.dump(2) + "\n";
}

ResolvedRun resolve(const RunConfig& c) {
  ResolvedRun r;
  ModelParams& p = r.params;
  p.horizon = c.model.horizon;
  p.mortality = to_function(c.model.mortality, "model.mu");
  if (c.model.triangular_scale) {
    if (!(*c.model.triangular_scale > 0.0)) invalid("model.k.triangular", "must be positive");
    p.birth_modulus = PiecewiseLinear::triangular(*c.model.triangular_scale, c.model.horizon);
  } else {
    p.birth_modulus = to_function(c.model.birth, "model.k");
  }
  p.output_weight = to_function(c.model.output_weight, "model.p");
  p.d_min = c.model.d_min;
  p.d_max = c.model.d_max;
  p.period = c.model.period;
  p.scale = c.model.scale;
  try {
    p.validate();
  } catch (const InvalidParameter& e) {
    invalid(field_of(e.what(), "model"), e.what());
  }

  if (!(c.grid.step > 0.0)) invalid("grid.h", "must be positive");
  try {
    r.grid = AgeGrid::from_step(p.horizon, c.grid.step);
  } catch (const Error&) {
    invalid("grid.h", "A/h not integer");
  }
  try {
    steps_per_period(p.period, c.grid.step);
  } catch (const Error&) {
    invalid("model.T", "T/h not integer");
  }
  try {
    steps_for(c.grid.t_end, c.grid.step);
  } catch (const Error&) {
    invalid("grid.t_end", "t_end/h not integer");
  }
  for (const auto* t : {&p.mortality, &p.birth_modulus, &p.output_weight}) {
    try {
      (void)t->sample_aligned(r.grid);
    } catch (const Error& e) {
      const char* field = t == &p.mortality ? "model.mu" : t == &p.birth_modulus ? "model.k" : "model.p";
      invalid(field, e.what());
    }
  }

  try {
    r.equilibrium = solve_d_star(p, r.grid);
  } catch (const NoRootInBracket& e) {
    invalid("model", e.what());
  }

  ControllerSpec& s = r.controller;
  s.variant = c.controller.variant;
  s.d_star_used = c.controller.bias * c.controller.d_star_used.value_or(r.equilibrium.d_star);
  s.reference = s.variant == ControlVariant::newborn_feedback ? r.equilibrium.f_star.values[0] : r.equilibrium.y_star;
  s.period = p.period;
  s.d_min = p.d_min;
  s.d_max = p.d_max;
  try {
    s.validate();
  } catch (const Error& e) {
    invalid("controller", e.what());
  }

  try {
    switch (c.initial.kind) {
      case InitialBlock::Kind::family:
        r.initial = make_initial_profile(c.initial.b0, c.initial.c, c.initial.theta, p, r.grid);
        break;
      case InitialBlock::Kind::table:
        r.initial = profile_from_table(c.initial.table, p, r.grid);
        break;
      case InitialBlock::Kind::equilibrium:
        r.initial = r.equilibrium.f_star;
        break;
    }
  } catch (const Error& e) {
    invalid("initial", e.what());
  }
  if (c.output.stride < 1) invalid("output.stride", "must be >= 1");
  return r;
}

std::vector<std::string> preset_names() { return {"sim1", "sim2", "sim3_newborn", "sim3_output", "openloop"}; }

RunConfig preset(std::string_view name) {
  const ModelParams ref = reference_params();
  RunConfig c;
  c.name = std::string(name);
  c.model.horizon = ref.horizon;
  c.model.mortality = constant_table(0.1, ref.horizon);
  c.model.triangular_scale = triangular_birth_scale(0.1, 1.0, ref.horizon);
  c.model.output_weight = constant_table(1.0, ref.horizon);
  c.model.d_min = ref.d_min;
  c.model.d_max = ref.d_max;
  c.model.period = ref.period;
  c.model.scale = ref.scale;
  c.grid = {0.04, 40.0};
  c.controller = {ControlVariant::output_feedback, std::nullopt, 1.0};
  c.initial.kind = InitialBlock::Kind::family;
  c.initial.b0 = 0.2;
  c.initial.c = 0.8;
  c.initial.theta = 1.0;
  c.output.dir = "out/" + c.name;

  if (name == "sim1") return c;
  if (name == "sim2") {
    c.initial.b0 = 1.0;
    c.initial.c = 4.0;
    return c;
  }
  if (name == "sim3_newborn" || name == "sim3_output") {
    c.controller.variant = name == "sim3_newborn" ? ControlVariant::newborn_feedback : ControlVariant::output_feedback;
    c.controller.bias = 0.7;
    return c;
  }
  if (name == "openloop") {
    c.controller.variant = ControlVariant::open_loop;
    c.initial = {};
    c.initial.kind = InitialBlock::Kind::equilibrium;
    return c;
  }
  invalid("preset", "unknown preset '" + std::string(name) + "'");
}

}  // namespace chemostat::cli
