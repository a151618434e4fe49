#pragma once

// Run configuration for the dicke command-line tool.
//
// A config is one JSON object. Frequencies in "params", "grid", "sweep" and
// "panels" are in units of the drive frequency; "params.Omega" sets the
// absolute scale. Keys that the chosen subcommand does not read are rejected.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dicke/core.hpp"

namespace dicke::cli {

using json = nlohmann::json;

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Command { Stability, PhaseDiagram, Section, Spectrum, Verify, CriticalLines };

std::string_view command_name(Command c);
std::optional<Command> parse_command(std::string_view name);
const std::vector<Command>& all_commands();

struct Sweep {
  double min = 0.0;
  double max = 1.0;
  std::size_t steps = 2;
  [[nodiscard]] std::vector<double> values() const;
};

struct Numerics {
  // stability
  int steps_per_period = 2000;
  double tol_stability = 1e-9;
  double tol_det = 1e-6;
  // phase-diagram, section
  std::size_t seeds = 41;
  double seed_x_max = 3.0;
  double tol_grad = 1e-10;
  double tol_dedup = 1e-6;
  double tol_degeneracy_rel = 1e-10;
  bool check_doubling = true;
  bool locate_first_order = true;
  std::size_t samples = 401;
  std::size_t x_samples = 2001;
  double y_margin = 1e-3;
  // spectrum, verify
  int k = 0;
  std::string variant = "full";
  std::vector<int> n_atoms_values{8, 16};
  int n_atoms = 4;
  int n_max = 0;  // 0 selects the default cutoff (spectrum only)
  std::size_t n_eigs = 3;
  int fock_padding = 32;
  std::size_t dense_limit = 4000;
  double lanczos_tol = 1e-11;
  // verify
  int n_slices = 4096;
  int average_slices = 256;
  double tol_quadrature = 1e-7;
  double cluster_tol = 1e-6;
  std::size_t n_low = 5;
  double tol_average = 1e-6;
  double fidelity_threshold = 0.999;
  bool include_a2 = false;
  double alpha = 0.0;
  // critical-lines
  std::vector<int> k_values{0, 1, 2};
};

struct RunConfig {
  Command command = Command::Stability;
  // units of Omega, except Omega itself
  double omega = 0.05;
  double omega0 = 0.05;
  double g = 0.0;
  double dg = 0.0;
  double Omega = 1.0;
  GridSpec grid;
  Sweep sweep;
  std::vector<double> panels;
  Numerics numerics;
  std::string output = "-";
  std::optional<std::size_t> threads;

  /// Absolute-unit parameters.
  [[nodiscard]] ModelParams model() const;
  /// Normalised form: every key the command reads, defaults filled in.
  [[nodiscard]] json to_json() const;
  /// FNV-1a of to_json() without "output" and "threads".
  [[nodiscard]] std::string hash() const;
};

/// Validates and fills defaults. Throws ConfigError naming the offending key.
RunConfig parse_config(const json& doc, Command command);

/// Sets a dotted key, e.g. "numerics.k=1". The value is read as JSON when it
/// parses, otherwise as a string.
void apply_override(json& doc, std::string_view assignment);

json load_config_file(const std::string& path);

}  // namespace dicke::cli
