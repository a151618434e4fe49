#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

#include "dicke/io.hpp"

namespace dicke::cli {

namespace {

struct CommandInfo {
  Command command;
  std::string_view name;
};

constexpr CommandInfo kCommands[] = {
    {Command::Stability, "stability"}, {Command::PhaseDiagram, "phase-diagram"},
    {Command::Section, "section"},     {Command::Spectrum, "spectrum"},
    {Command::Verify, "verify"},       {Command::CriticalLines, "critical-lines"},
};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

double get_double(const json& j, const std::string& key) {
  if (!j.is_number()) fail(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(key, "must be finite");
  return v;
}

long long get_integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) fail(key, "expected an integer");
  return j.get<long long>();
}

int get_int(const json& j, const std::string& key) {
  const long long v = get_integer(j, key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    fail(key, "out of range");
  return static_cast<int>(v);
}

std::size_t get_count(const json& j, const std::string& key) {
  const long long v = get_integer(j, key);
  if (v < 0) fail(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

bool get_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) fail(key, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) fail(key, "expected a string");
  return j.get<std::string>();
}

// One numerics entry: reader and writer on the Numerics struct.
struct Field {
  std::string_view name;
  std::function<void(Numerics&, const json&, const std::string&)> read;
  std::function<json(const Numerics&)> write;
};

template <class T>
Field field(std::string_view name, T Numerics::*member) {
  Field f{name, nullptr, [member](const Numerics& n) { return json(n.*member); }};
  f.read = [member](Numerics& n, const json& j, const std::string& key) {
    if constexpr (std::is_same_v<T, double>) {
      n.*member = get_double(j, key);
    } else if constexpr (std::is_same_v<T, int>) {
      n.*member = get_int(j, key);
    } else if constexpr (std::is_same_v<T, std::size_t>) {
      n.*member = get_count(j, key);
    } else if constexpr (std::is_same_v<T, bool>) {
      n.*member = get_bool(j, key);
    } else if constexpr (std::is_same_v<T, std::string>) {
      n.*member = get_string(j, key);
    } else {
      if (!j.is_array()) fail(key, "expected a list of integers");
      T out;
      for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_int(j[i], key + "[" + std::to_string(i) + "]"));
      n.*member = out;
    }
  };
  return f;
}

const std::vector<Field>& all_fields() {
  static const std::vector<Field> fields = {
      field("steps_per_period", &Numerics::steps_per_period),
      field("tol_stability", &Numerics::tol_stability),
      field("tol_det", &Numerics::tol_det),
      field("seeds", &Numerics::seeds),
      field("seed_x_max", &Numerics::seed_x_max),
      field("tol_grad", &Numerics::tol_grad),
      field("tol_dedup", &Numerics::tol_dedup),
      field("tol_degeneracy_rel", &Numerics::tol_degeneracy_rel),
      field("check_doubling", &Numerics::check_doubling),
      field("locate_first_order", &Numerics::locate_first_order),
      field("samples", &Numerics::samples),
      field("x_samples", &Numerics::x_samples),
      field("y_margin", &Numerics::y_margin),
      field("k", &Numerics::k),
      field("variant", &Numerics::variant),
      field("n_atoms_values", &Numerics::n_atoms_values),
      field("n_atoms", &Numerics::n_atoms),
      field("n_max", &Numerics::n_max),
      field("n_eigs", &Numerics::n_eigs),
      field("fock_padding", &Numerics::fock_padding),
      field("dense_limit", &Numerics::dense_limit),
      field("lanczos_tol", &Numerics::lanczos_tol),
      field("n_slices", &Numerics::n_slices),
      field("average_slices", &Numerics::average_slices),
      field("tol_quadrature", &Numerics::tol_quadrature),
      field("cluster_tol", &Numerics::cluster_tol),
      field("n_low", &Numerics::n_low),
      field("tol_average", &Numerics::tol_average),
      field("fidelity_threshold", &Numerics::fidelity_threshold),
      field("include_a2", &Numerics::include_a2),
      field("alpha", &Numerics::alpha),
      field("k_values", &Numerics::k_values),
  };
  return fields;
}

const Field& find_field(std::string_view name) {
  for (const auto& f : all_fields())
    if (f.name == name) return f;
  throw std::logic_error("unregistered numerics field");
}

struct Schema {
  std::vector<std::string_view> params;
  bool grid = false;
  std::string_view grid_x, grid_y;  // axis meaning, for messages
  bool sweep = false;
  bool panels = false;
  std::vector<std::string_view> numerics;
};

const Schema& schema(Command c) {
  static const std::vector<std::string_view> minima = {"seeds", "seed_x_max", "tol_grad", "tol_dedup",
                                                       "tol_degeneracy_rel", "check_doubling"};
  auto with_minima = [](std::vector<std::string_view> extra) {
    std::vector<std::string_view> v = minima;
    v.insert(v.end(), extra.begin(), extra.end());
    return v;
  };
  static const Schema stability{{"dg", "Omega"}, true, "g", "omega", false, false,
                                {"steps_per_period", "tol_stability", "tol_det"}};
  static const Schema phase{{"omega", "omega0", "Omega"}, true, "g", "dg", false, false,
                            with_minima({"locate_first_order"})};
  static const Schema section{{"omega", "omega0", "g", "Omega"}, false, "", "", false, true,
                              with_minima({"samples", "x_samples", "y_margin"})};
  static const Schema spectrum{{"omega", "omega0", "dg", "Omega"}, false, "", "", true, false,
                               {"k", "variant", "n_atoms_values", "n_max", "n_eigs", "dense_limit",
                                "lanczos_tol"}};
  static const Schema verify{{"omega", "omega0", "g", "dg", "Omega"}, false, "", "", false, false,
                             {"k", "n_atoms", "n_max", "n_slices", "average_slices", "tol_quadrature",
                              "fock_padding", "cluster_tol", "n_low", "tol_average",
                              "fidelity_threshold", "include_a2", "alpha"}};
  static const Schema critical{{"omega", "omega0", "Omega"}, false, "", "", true, false, {"k_values"}};
  switch (c) {
    case Command::Stability: return stability;
    case Command::PhaseDiagram: return phase;
    case Command::Section: return section;
    case Command::Spectrum: return spectrum;
    case Command::Verify: return verify;
    case Command::CriticalLines: return critical;
  }
  throw std::logic_error("unknown command");
}

bool contains(const std::vector<std::string_view>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void require_object(const json& j, const std::string& key) {
  if (!j.is_object()) fail(key, "expected an object");
}

void reject_unknown(const json& obj, const std::vector<std::string_view>& allowed,
                    const std::string& prefix) {
  for (const auto& item : obj.items())
    if (!contains(allowed, item.key())) fail(prefix + item.key(), "unknown key for this subcommand");
}

double* param_slot(RunConfig& c, std::string_view name) {
  if (name == "omega") return &c.omega;
  if (name == "omega0") return &c.omega0;
  if (name == "g") return &c.g;
  if (name == "dg") return &c.dg;
  if (name == "Omega") return &c.Omega;
  return nullptr;
}

double param_value(const RunConfig& c, std::string_view name) {
  return *param_slot(const_cast<RunConfig&>(c), name);
}

void check_positive(double v, const char* key) {
  if (!(v > 0.0)) fail(std::string("numerics.") + key, "must be positive");
}

void validate_numerics(const Numerics& n, Command c) {
  const auto& keys = schema(c).numerics;
  auto used = [&](std::string_view k) { return contains(keys, k); };
  for (auto [key, v] : std::initializer_list<std::pair<const char*, double>>{
           {"tol_stability", n.tol_stability}, {"tol_det", n.tol_det}, {"tol_grad", n.tol_grad},
           {"tol_dedup", n.tol_dedup}, {"tol_degeneracy_rel", n.tol_degeneracy_rel},
           {"lanczos_tol", n.lanczos_tol}, {"tol_quadrature", n.tol_quadrature},
           {"cluster_tol", n.cluster_tol}, {"tol_average", n.tol_average},
           {"seed_x_max", n.seed_x_max}, {"y_margin", n.y_margin}})
    if (used(key)) check_positive(v, key);
  if (used("variant") && n.variant != "full" && n.variant != "second_order")
    fail("numerics.variant", "expected \"full\" or \"second_order\"");
  if (used("fidelity_threshold") && !(n.fidelity_threshold > 0.0 && n.fidelity_threshold <= 1.0))
    fail("numerics.fidelity_threshold", "must lie in (0, 1]");
  if (used("alpha") && n.alpha < 0.0) fail("numerics.alpha", "must be non-negative");
  if (used("seeds") && n.seeds < 2) fail("numerics.seeds", "must be at least 2");
  if (used("n_eigs") && n.n_eigs < 1) fail("numerics.n_eigs", "must be at least 1");
  if (used("n_low") && n.n_low < 1) fail("numerics.n_low", "must be at least 1");
  if (used("n_atoms") && n.n_atoms < 1) fail("numerics.n_atoms", "must be at least 1");
  if (used("n_atoms_values")) {
    if (n.n_atoms_values.empty()) fail("numerics.n_atoms_values", "must not be empty");
    for (int v : n.n_atoms_values)
      if (v < 1) fail("numerics.n_atoms_values", "entries must be at least 1");
  }
  if (used("n_max") && (c == Command::Verify ? n.n_max < 1 : n.n_max < 0))
    fail("numerics.n_max", c == Command::Verify ? "must be at least 1" : "must be >= 0 (0 = default)");
  if (used("fock_padding") && n.fock_padding < 0) fail("numerics.fock_padding", "must be >= 0");
  if (used("k_values") && n.k_values.empty()) fail("numerics.k_values", "must not be empty");
}

}  // namespace

std::string_view command_name(Command c) {
  for (const auto& info : kCommands)
    if (info.command == c) return info.name;
  return "?";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& info : kCommands)
    if (info.name == name) return info.command;
  return std::nullopt;
}

const std::vector<Command>& all_commands() {
  static const std::vector<Command> v = [] {
    std::vector<Command> out;
    for (const auto& info : kCommands) out.push_back(info.command);
    return out;
  }();
  return v;
}

std::vector<double> Sweep::values() const {
  std::vector<double> v(steps);
  for (std::size_t i = 0; i < steps; ++i)
    v[i] = steps == 1 ? min
                      : (min * static_cast<double>(steps - 1 - i) + max * static_cast<double>(i)) /
                            static_cast<double>(steps - 1);
  return v;
}

ModelParams RunConfig::model() const {
  ModelParams p;
  p.Omega = Omega;
  p.omega = omega * Omega;
  p.omega0 = omega0 * Omega;
  p.g = g * Omega;
  p.dg = dg * Omega;
  return p;
}

json RunConfig::to_json() const {
  const Schema& s = schema(command);
  json doc = json::object();
  doc["subcommand"] = std::string(command_name(command));
  json params = json::object();
  for (auto name : s.params) params[std::string(name)] = param_value(*this, name);
  doc["params"] = params;
  if (s.grid)
    doc["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"x_steps", grid.x_steps},
                   {"y_min", grid.y_min}, {"y_max", grid.y_max}, {"y_steps", grid.y_steps}};
  if (s.sweep) doc["sweep"] = {{"min", sweep.min}, {"max", sweep.max}, {"steps", sweep.steps}};
  if (s.panels) doc["panels"] = panels;
  json num = json::object();
  for (auto name : s.numerics) num[std::string(name)] = find_field(name).write(numerics);
  doc["numerics"] = num;
  doc["output"] = output;
  if (threads) doc["threads"] = *threads;
  return doc;
}

std::string RunConfig::hash() const {
  json doc = to_json();
  doc.erase("output");
  doc.erase("threads");
  return io::hex64(io::fnv1a64(doc.dump()));
}

RunConfig parse_config(const json& doc, Command command) {
  require_object(doc, "<root>");
  const Schema& s = schema(command);
  RunConfig c;
  c.command = command;
  if (command == Command::Verify) c.numerics.n_max = 20;

  std::vector<std::string_view> top = {"subcommand", "params", "numerics", "output", "threads"};
  if (s.grid) top.push_back("grid");
  if (s.sweep) top.push_back("sweep");
  if (s.panels) top.push_back("panels");
  reject_unknown(doc, top, "");

  if (doc.contains("subcommand") && get_string(doc["subcommand"], "subcommand") != command_name(command))
    fail("subcommand", "config is for '" + doc["subcommand"].get<std::string>() + "', not '" +
                           std::string(command_name(command)) + "'");

  if (doc.contains("params")) {
    const json& p = doc["params"];
    require_object(p, "params");
    reject_unknown(p, s.params, "params.");
    for (const auto& item : p.items()) *param_slot(c, item.key()) = get_double(item.value(), "params." + item.key());
  }
  if (!(c.Omega > 0.0)) fail("params.Omega", "must be positive");
  for (auto name : s.params) {
    if (name == "Omega") continue;
    const double v = param_value(c, name);
    if ((name == "omega" || name == "omega0") ? !(v > 0.0) : v < 0.0)
      fail("params." + std::string(name), name.substr(0, 5) == "omega" ? "must be positive" : "must be non-negative");
  }

  if (s.grid) {
    if (!doc.contains("grid")) fail("grid", "required (x = " + std::string(s.grid_x) + ", y = " + std::string(s.grid_y) + ")");
    const json& gj = doc["grid"];
    require_object(gj, "grid");
    const std::vector<std::string_view> keys = {"x_min", "x_max", "x_steps", "y_min", "y_max", "y_steps"};
    reject_unknown(gj, keys, "grid.");
    for (auto k : keys)
      if (!gj.contains(std::string(k))) fail("grid." + std::string(k), "required");
    c.grid.x_min = get_double(gj["x_min"], "grid.x_min");
    c.grid.x_max = get_double(gj["x_max"], "grid.x_max");
    c.grid.x_steps = get_count(gj["x_steps"], "grid.x_steps");
    c.grid.y_min = get_double(gj["y_min"], "grid.y_min");
    c.grid.y_max = get_double(gj["y_max"], "grid.y_max");
    c.grid.y_steps = get_count(gj["y_steps"], "grid.y_steps");
    try {
      c.grid.validate();
    } catch (const InvalidArgument& e) {
      fail("grid", e.what());
    }
  }
  if (s.sweep) {
    if (!doc.contains("sweep")) fail("sweep", "required");
    const json& sj = doc["sweep"];
    require_object(sj, "sweep");
    reject_unknown(sj, {"min", "max", "steps"}, "sweep.");
    for (auto k : {"min", "max", "steps"})
      if (!sj.contains(k)) fail(std::string("sweep.") + k, "required");
    c.sweep.min = get_double(sj["min"], "sweep.min");
    c.sweep.max = get_double(sj["max"], "sweep.max");
    c.sweep.steps = get_count(sj["steps"], "sweep.steps");
    if (c.sweep.steps < 1) fail("sweep.steps", "must be at least 1");
    if (c.sweep.steps > 1 && !(c.sweep.min < c.sweep.max)) fail("sweep", "need min < max");
    if (c.sweep.min < 0.0) fail("sweep.min", "must be non-negative");
  }
  if (s.panels) {
    if (!doc.contains("panels")) fail("panels", "required (list of dg values)");
    const json& pj = doc["panels"];
    if (!pj.is_array() || pj.empty()) fail("panels", "expected a non-empty list of numbers");
    for (std::size_t i = 0; i < pj.size(); ++i) {
      const double v = get_double(pj[i], "panels[" + std::to_string(i) + "]");
      if (v < 0.0) fail("panels[" + std::to_string(i) + "]", "must be non-negative");
      c.panels.push_back(v);
    }
  }
  if (doc.contains("numerics")) {
    const json& nj = doc["numerics"];
    require_object(nj, "numerics");
    reject_unknown(nj, s.numerics, "numerics.");
    for (const auto& item : nj.items())
      find_field(item.key()).read(c.numerics, item.value(), "numerics." + item.key());
  }
  validate_numerics(c.numerics, command);

  if (doc.contains("output")) c.output = get_string(doc["output"], "output");
  if (std::filesystem::path(c.output).extension() == ".json")
    fail("output", "must not end in .json; the summary is written next to it as <stem>.json");
  if (doc.contains("threads")) {
    const std::size_t t = get_count(doc["threads"], "threads");
    if (t < 1) fail("threads", "must be at least 1");
    c.threads = t;
  }
  return c;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "': expected key=value");
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + path + "': empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + path + "': parent is not an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return doc;
}

}  // namespace dicke::cli
