#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <CLI11.hpp>

#include "dicke/effective.hpp"
#include "dicke/floquet.hpp"
#include "dicke/io.hpp"
#include "dicke/landscape.hpp"
#include "dicke/mathieu.hpp"

namespace dicke::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool to_stdout(const RunConfig& c) { return c.output.empty() || c.output == "-"; }

// "<dir>/<stem><suffix>" next to the configured output.
std::string sibling(const RunConfig& c, const std::string& suffix) {
  const std::filesystem::path p(c.output);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::size_t thread_count(const RunConfig& c) { return c.threads.value_or(default_thread_count()); }

json base_summary(const RunConfig& c) {
  json s = json::object();
  s["subcommand"] = std::string(command_name(c.command));
  s["config_hash"] = c.hash();
  s["config"] = c.to_json();
  return s;
}

void emit_summary(const RunConfig& c, const json& summary, std::ostream& out) {
  const std::string text = summary.dump(2) + "\n";
  const std::string path = sibling(c, ".json");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidArgument("cannot open output file '" + path + "'");
  f << text;
  out << text;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// -- stability ---------------------------------------------------------------

void cmd_stability(const RunConfig& c, std::ostream& out) {
  const ModelParams base = c.model();
  const double W = c.Omega;
  GridSpec grid = c.grid;
  grid.x_min *= W;
  grid.x_max *= W;
  grid.y_min *= W;
  grid.y_max *= W;
  mathieu::MapOptions opt;
  opt.steps_per_period = c.numerics.steps_per_period;
  opt.tol.stability = c.numerics.tol_stability;
  opt.tol.det = c.numerics.tol_det;
  opt.threads = thread_count(c);
  const auto map = mathieu::stability_map(base, grid, opt);

  io::CsvWriter csv(c.output, out, "stability", c.hash(),
                    {"g", "omega", "stable_plus", "stable_minus", "stable"});
  for (std::size_t j = 0; j < c.grid.y_steps; ++j)
    for (std::size_t i = 0; i < c.grid.x_steps; ++i) {
      const std::size_t idx = map.index(i, j);
      csv.row({c.grid.x_at(i), c.grid.y_at(j), map.verdicts[idx].plus, map.verdicts[idx].minus,
               static_cast<bool>(map.combined[idx])});
    }
  csv.close();
  if (to_stdout(c)) return;

  json summary = base_summary(c);
  summary["unstable_fraction"] = map.unstable_fraction();
  json first = json::array();
  for (std::size_t j = 0; j < c.grid.y_steps; ++j) {
    double g = kNaN;
    for (std::size_t i = 0; i < c.grid.x_steps; ++i)
      if (!map.combined[map.index(i, j)]) {
        g = c.grid.x_at(i);
        break;
      }
    first.push_back({{"omega", c.grid.y_at(j)}, {"g", nullable(g)}});
  }
  summary["first_unstable_g"] = first;

  // Nearest-cell verdicts along the resonance curves eps_pm = k Omega / 2.
  json tongues = json::array();
  for (int k = 1; k <= 3; ++k)
    for (int sign : {+1, -1}) {
      std::size_t points = 0, unstable = 0;
      for (std::size_t j = 0; j < c.grid.y_steps; ++j) {
        const double g = mathieu::resonance_coupling(k, 1.0, c.grid.y_at(j), sign);
        if (g < c.grid.x_min || g > c.grid.x_max) continue;
        const auto i = static_cast<std::size_t>(std::lround((g - c.grid.x_min) / c.grid.dx()));
        ++points;
        if (!map.combined[map.index(i, j)]) ++unstable;
      }
      tongues.push_back({{"k", k}, {"sign", sign > 0 ? "+" : "-"}, {"curve_points", points},
                         {"unstable_points", unstable}});
    }
  summary["resonances"] = tongues;
  summary["files"] = {c.output};
  emit_summary(c, summary, out);
}

// -- phase diagram -----------------------------------------------------------

landscape::MinimaOptions minima_options(const Numerics& n) {
  landscape::MinimaOptions o;
  o.tol_grad = n.tol_grad;
  o.tol_dedup = n.tol_dedup;
  o.tol_degeneracy_rel = n.tol_degeneracy_rel;
  o.check_doubling = n.check_doubling;
  return o;
}

void cmd_phase_diagram(const RunConfig& c, std::ostream& out) {
  const double W = c.Omega;
  GridSpec grid = c.grid;
  grid.x_min *= W;
  grid.x_max *= W;
  grid.y_min *= W;
  grid.y_max *= W;
  landscape::PhaseDiagramOptions opt;
  opt.seeds = landscape::default_seed_grid(c.numerics.seed_x_max, c.numerics.seeds);
  opt.minima = minima_options(c.numerics);
  opt.threads = thread_count(c);
  opt.locate_first_order = c.numerics.locate_first_order;
  const auto pd = landscape::phase_diagram(c.model(), grid, opt);

  io::CsvWriter csv(c.output, out, "phase-diagram", c.hash(),
                    {"g", "dg", "kind", "n_local", "n_global", "global_at_origin"});
  std::size_t counts[3] = {0, 0, 0};
  std::size_t flagged = 0, even_multistable = 0;
  for (std::size_t j = 0; j < c.grid.y_steps; ++j)
    for (std::size_t i = 0; i < c.grid.x_steps; ++i) {
      const auto& cell = pd.cells[pd.index(i, j)];
      const auto& l = cell.label;
      csv.row({c.grid.x_at(i), c.grid.y_at(j), landscape::phase_name(l.kind), l.n_local, l.n_global,
               l.global_at_origin});
      ++counts[static_cast<int>(l.kind)];
      flagged += cell.seed_grid_too_coarse ? 1 : 0;
      if (l.kind == landscape::PhaseKind::Multistable && l.n_local % 2 == 0) ++even_multistable;
    }
  csv.close();
  if (to_stdout(c)) return;

  const std::string boundary_path = sibling(c, "_boundary.csv");
  io::CsvWriter boundary(boundary_path, out, "phase-diagram", c.hash(), {"g", "dg_star"});
  for (const auto& [g, dg] : pd.first_order_line) boundary.row({g / W, dg / W});
  boundary.close();

  const std::string second_path = sibling(c, "_second_order.csv");
  io::CsvWriter second(second_path, out, "phase-diagram", c.hash(), {"dg", "g_c"});
  for (const auto& [dg, g] : pd.second_order_line) second.row({dg / W, g / W});
  second.close();

  json summary = base_summary(c);
  summary["cells"] = {{"normal", counts[0]}, {"superradiant", counts[1]}, {"multistable", counts[2]}};
  summary["seed_grid_too_coarse_cells"] = flagged;
  summary["multistable_even_count_cells"] = even_multistable;
  json fo = json::array();
  for (const auto& [g, dg] : pd.first_order_line) fo.push_back({{"g", g / W}, {"dg_star", dg / W}});
  summary["first_order_line"] = fo;
  summary["files"] = {c.output, boundary_path, second_path};
  emit_summary(c, summary, out);
}

// -- section -----------------------------------------------------------------

void cmd_section(const RunConfig& c, std::ostream& out) {
  if (to_stdout(c)) throw ConfigError("section writes one file per panel; set --output to a path");
  const double W = c.Omega;
  landscape::SectionOptions sopt;
  sopt.x_max = c.numerics.seed_x_max;
  sopt.y_margin = c.numerics.y_margin;
  sopt.x_samples = c.numerics.x_samples;
  const auto seeds = landscape::default_seed_grid(c.numerics.seed_x_max, c.numerics.seeds);
  const auto mopt = minima_options(c.numerics);

  json summary = base_summary(c);
  json panels = json::array();
  json files = json::array();
  for (std::size_t p = 0; p < c.panels.size(); ++p) {
    ModelParams params = c.model();
    params.dg = c.panels[p] * W;
    const auto pts = landscape::section(params, c.numerics.samples, sopt);
    const std::string path = sibling(c, "_panel" + std::to_string(p + 1) + ".csv");
    io::CsvWriter csv(path, out, "section", c.hash(), {"Y", "X_of_Y", "E"});
    for (const auto& s : pts) csv.row({s.Y, s.X, s.E / W});
    csv.close();
    files.push_back(path);

    const auto ms = landscape::find_minima(params, seeds, mopt);
    const auto label = landscape::classify_phase(ms, mopt.tol_dedup);
    json minima = json::array();
    for (const auto& m : ms.minima)
      minima.push_back({{"X", m.point.X}, {"Y", m.point.Y}, {"E", m.point.E / W}, {"global", m.is_global}});
    panels.push_back({{"dg", c.panels[p]},
                      {"file", path},
                      {"kind", landscape::phase_name(label.kind)},
                      {"n_local", label.n_local},
                      {"n_global", label.n_global},
                      {"global_at_origin", label.global_at_origin},
                      {"minima", minima}});
  }
  summary["panels"] = panels;
  summary["files"] = files;
  emit_summary(c, summary, out);
}

// -- spectrum ----------------------------------------------------------------

void cmd_spectrum(const RunConfig& c, std::ostream& out) {
  const double W = c.Omega;
  const int k = c.numerics.k;
  const auto variant =
      c.numerics.variant == "full" ? effective::Variant::Full : effective::Variant::SecondOrder;
  effective::SpectrumOptions sopt;
  sopt.dense_limit = c.numerics.dense_limit;
  sopt.lanczos_tol = c.numerics.lanczos_tol;
  const auto gs = c.sweep.values();

  io::CsvWriter csv(c.output, out, "spectrum", c.hash(),
                    {"k", "g", "dg", "N", "n_max", "e0", "e1", "e2", "order_field", "order_atom"});
  json per_n = json::array();
  double max_defect = 0.0;
  for (int N : c.numerics.n_atoms_values) {
    std::vector<double> field;
    for (double g : gs) {
      ModelParams params = c.model();
      params.g = g * W;
      params.validate();
      const int n_max = c.numerics.n_max > 0 ? c.numerics.n_max : effective::default_fock_cutoff(params, N);
      const effective::QuantumBasis basis{N, n_max};
      const auto sol = effective::solve_effective(k, params, basis, variant, c.numerics.n_eigs, sopt);
      const auto& ev = sol.spectrum.eigenvalues;
      auto e = [&](std::size_t i) { return i < ev.size() ? ev[i] / W : kNaN; };
      csv.row({k, g, c.dg, N, n_max, e(0), e(1), e(2), sol.spectrum.order_field, sol.spectrum.order_atom});
      field.push_back(sol.spectrum.order_field);
      max_defect = std::max(max_defect, sol.cutoff_defect / W);
    }
    json entry = {{"N", N}};
    entry["steepest_rise_g"] = gs.size() >= 3 ? json(effective::steepest_rise(gs, field)) : json(nullptr);
    per_n.push_back(entry);
  }
  csv.close();
  if (to_stdout(c)) return;

  json summary = base_summary(c);
  json lines = json::array();
  for (double g : effective::critical_line(k, c.model())) lines.push_back(g / W);
  summary["critical_line"] = lines;
  summary["order_field_steepest_rise"] = per_n;
  summary["max_cutoff_defect"] = max_defect;
  if (k == 0 && c.dg == 0.0 && variant == effective::Variant::Full) {
    // With no drive the effective Hamiltonian is the static Dicke matrix.
    ModelParams params = c.model();
    params.g = gs.back() * W;
    const effective::QuantumBasis basis{c.numerics.n_atoms_values.front(),
                                        c.numerics.n_max > 0 ? c.numerics.n_max : 20};
    const double diff = (effective::build_h0(0, params, basis, variant).m -
                         floquet::hamiltonian_at(0.0, floquet::DriveConfig{params}, basis).m)
                            .cwiseAbs()
                            .maxCoeff();
    summary["undriven_equivalence"] = {{"max_abs_difference", diff / W}, {"pass", diff <= 1e-12 * W}};
  }
  summary["files"] = {c.output};
  emit_summary(c, summary, out);
}

// -- verify ------------------------------------------------------------------

void cmd_verify(const RunConfig& c, std::ostream& out) {
  const double W = c.Omega;
  const int k = c.numerics.k;
  floquet::DriveConfig cfg{c.model()};
  cfg.include_a2 = c.numerics.include_a2;
  cfg.alpha = c.numerics.alpha;
  const effective::QuantumBasis basis{c.numerics.n_atoms, c.numerics.n_max};

  json report = base_summary(c);
  const auto variant = k == 0 ? effective::Variant::Full : effective::Variant::SecondOrder;
  if (!c.numerics.include_a2) {
    floquet::AverageOptions aopt;
    aopt.n_slices = c.numerics.average_slices;
    aopt.fock_padding = c.numerics.fock_padding;
    aopt.tol = c.numerics.tol_quadrature;
    const auto avg = floquet::rotating_frame_average(cfg, k, basis, aopt);
    const auto h0 = effective::build_h0(k, cfg.params, basis, variant, c.numerics.fock_padding);
    const double resid = (avg.m - h0.m).cwiseAbs().maxCoeff() / W;
    json a = {{"reference", k == 0 ? "full" : "second_order"}, {"max_abs_residual", resid}};
    if (k == 0) {
      a["tolerance"] = c.numerics.tol_average;
      a["pass"] = resid <= c.numerics.tol_average;
    } else {
      // Second-order forms leave an O((dg/Omega)^3) remainder; reported only.
      a["drive_ratio_cubed"] = std::pow(c.dg, 3);
      a["pass"] = nullptr;
    }
    report["average"] = a;
  } else {
    report["average"] = {{"skipped", "the effective Hamiltonians carry no A^2 term"}};
  }

  floquet::CrosscheckOptions xopt;
  xopt.n_slices = c.numerics.n_slices;
  xopt.cluster_tol = c.numerics.cluster_tol;
  const auto x = floquet::rwa_crosscheck(cfg, k, basis, c.numerics.n_low, xopt);
  const bool unitary = x.unitarity_defect <= floquet::kTolUnitary;
  const bool faithful = x.min_fidelity >= c.numerics.fidelity_threshold;
  json xs = {{"fidelities", x.fidelities},
             {"mean_fidelity", x.mean_fidelity},
             {"min_fidelity", x.min_fidelity},
             {"fidelity_threshold", c.numerics.fidelity_threshold},
             {"unitarity_defect", x.unitarity_defect},
             {"unitarity_tolerance", floquet::kTolUnitary}};
  json qe = json::array();
  for (double e : x.quasienergy_errors) qe.push_back(e / W);
  xs["quasienergy_errors"] = qe;
  xs["pass"] = unitary && faithful;
  report["crosscheck"] = xs;

  const auto v = effective::rwa_validity(cfg.params, k);
  const Detunings det = detunings(cfg.params, k);
  const double worst = k == 0 ? std::max({v.g_over_scale, v.omega_over_scale, v.omega0_over_scale})
                              : std::max({v.g_over_scale, std::abs(det.delta_k) / v.scale,
                                          std::abs(det.delta0_k) / v.scale});
  report["validity"] = {{"g_over_scale", v.g_over_scale},
                        {"omega_over_scale", v.omega_over_scale},
                        {"omega0_over_scale", v.omega0_over_scale},
                        {"delta_over_scale", std::abs(det.delta_k) / v.scale},
                        {"delta0_over_scale", std::abs(det.delta0_k) / v.scale},
                        {"drive_sq", v.drive_sq},
                        {"within_window", worst <= 0.1}};

  if (to_stdout(c)) {
    out << report.dump(2) << "\n";
    return;
  }
  io::CsvWriter csv(c.output, out, "verify", c.hash(),
                    {"k", "g", "dg", "N", "n_max", "quasienergy_index", "quasienergy", "fidelity"});
  for (std::size_t i = 0; i < x.fidelities.size(); ++i)
    csv.row({k, c.g, c.dg, basis.n_atoms, basis.n_max, i, x.matched_quasienergies[i] / W,
             x.fidelities[i]});
  csv.close();
  report["files"] = {c.output};
  emit_summary(c, report, out);
}

// -- critical lines ----------------------------------------------------------

void cmd_critical_lines(const RunConfig& c, std::ostream& out) {
  const double W = c.Omega;
  io::CsvWriter csv(c.output, out, "critical-lines", c.hash(), {"k", "dg", "branch", "g"});
  std::size_t rows = 0;
  for (int k : c.numerics.k_values)
    for (double dg : c.sweep.values()) {
      ModelParams p = c.model();
      p.dg = dg * W;
      const auto branches = effective::critical_branches(k, p);
      for (std::size_t b = 0; b < branches.size(); ++b)
        if (branches[b] >= 0.0) {
          csv.row({k, dg, b, branches[b] / W});
          ++rows;
        }
    }
  csv.close();
  if (to_stdout(c)) return;
  json summary = base_summary(c);
  summary["rows"] = rows;
  summary["files"] = {c.output};
  emit_summary(c, summary, out);
}

// -- error reporting ---------------------------------------------------------

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const UnsupportedVariant*>(&e)) return "UnsupportedVariant";
  if (dynamic_cast<const landscape::NoBracket*>(&e)) return "NoBracket";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
  if (dynamic_cast<const landscape::SeedGridTooCoarse*>(&e)) return "SeedGridTooCoarse";
  if (dynamic_cast<const floquet::UnitarityLoss*>(&e)) return "UnitarityLoss";
  if (dynamic_cast<const floquet::QuadratureNonConvergence*>(&e)) return "QuadratureNonConvergence";
  if (dynamic_cast<const effective::EigensolverFailure*>(&e)) return "EigensolverFailure";
  if (dynamic_cast<const NonConvergence*>(&e)) return "NonConvergence";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  return "InternalError";
}

int report_error(std::ostream& err, int code, const std::string& kind, const std::string& type,
                 const std::string& message) {
  const json j = {{"error", {{"exit_code", code}, {"kind", kind}, {"type", type}, {"message", message}}}};
  err << j.dump() << "\n";
  return code;
}

struct Flags {
  std::string config;
  std::string output;
  std::size_t threads = 0;
  std::vector<std::string> sets;
  double omega = 0, omega0 = 0, g = 0, dg = 0, Omega = 0;
  int k = 0;
};

}  // namespace

void execute(const RunConfig& c, std::ostream& out) {
  switch (c.command) {
    case Command::Stability: return cmd_stability(c, out);
    case Command::PhaseDiagram: return cmd_phase_diagram(c, out);
    case Command::Section: return cmd_section(c, out);
    case Command::Spectrum: return cmd_spectrum(c, out);
    case Command::Verify: return cmd_verify(c, out);
    case Command::CriticalLines: return cmd_critical_lines(c, out);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Driven Dicke model: stability maps, effective spectra, landscapes, Floquet checks", "dicke"};
  app.require_subcommand(1);
  Flags f;
  struct Bound {
    Command command;
    CLI::App* sub;
    CLI::Option *threads, *omega, *omega0, *g, *dg, *Omega, *k;
  };
  std::vector<Bound> subs;
  for (Command cmd : all_commands()) {
    auto* sub = app.add_subcommand(std::string(command_name(cmd)));
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--output", f.output, "output CSV path, '-' for stdout");
    Bound b{cmd, sub, sub->add_option("--threads", f.threads, "worker threads (default: DICKE_THREADS or 1)")->check(CLI::PositiveNumber),
            sub->add_option("--omega", f.omega, "params.omega (units of Omega)"),
            sub->add_option("--omega0", f.omega0, "params.omega0 (units of Omega)"),
            sub->add_option("--g", f.g, "params.g (units of Omega)"),
            sub->add_option("--dg", f.dg, "params.dg (units of Omega)"),
            sub->add_option("--Omega", f.Omega, "params.Omega (absolute)"),
            sub->add_option("--k", f.k, "numerics.k")};
    sub->add_option("--set", f.sets, "override any config key, e.g. --set numerics.n_max=30");
    subs.push_back(b);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, kExitConfig, "usage", "UsageError", e.what());
  }

  try {
    const Bound* active = nullptr;
    for (const auto& b : subs)
      if (b.sub->parsed()) active = &b;
    json doc = f.config.empty() ? json::object() : load_config_file(f.config);
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& s : f.sets) apply_override(doc, s);
    auto set_param = [&](CLI::Option* opt, const char* key, double v) {
      if (opt->count() > 0) doc["params"][key] = v;
    };
    set_param(active->omega, "omega", f.omega);
    set_param(active->omega0, "omega0", f.omega0);
    set_param(active->g, "g", f.g);
    set_param(active->dg, "dg", f.dg);
    set_param(active->Omega, "Omega", f.Omega);
    if (active->k->count() > 0) doc["numerics"]["k"] = f.k;
    if (!f.output.empty()) doc["output"] = f.output;
    if (active->threads->count() > 0) doc["threads"] = f.threads;

    const RunConfig config = parse_config(doc, active->command);
    execute(config, out);
    return kExitOk;
  } catch (const InvalidArgument& e) {
    return report_error(err, kExitConfig, "config", error_type(e), e.what());
  } catch (const NumericalError& e) {
    return report_error(err, kExitNumerical, "numerical", error_type(e), e.what());
  } catch (const std::exception& e) {
    return report_error(err, kExitNumerical, "internal", error_type(e), e.what());
  }
}

}  // namespace dicke::cli
