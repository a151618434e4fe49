#pragma once

// Normal-phase stability of the driven Dicke model on resonance (omega0 = omega).
//
// In the thermodynamic limit the fluctuations about the normal phase obey two
// uncoupled Mathieu equations
//
//   q_pm'' + [eps_pm^2 pm 2 omega dg cos(Omega t)] q_pm = 0,
//   eps_pm^2 = omega^2 pm 2 g omega,
//
// whose one-period monodromy matrix decides stability (|tr M| <= 2). Only the
// omega0 = omega form is implemented; stability_map moves omega0 with omega.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "dicke/core.hpp"
#include "dicke/kernels/mathieu_batch.hpp"

namespace dicke::mathieu {

inline constexpr int kDefaultStepsPerPeriod = 2000;
inline constexpr int kMinStepsPerPeriod = 100;

class EmptyCurve : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoTongue : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MultipleTongues : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct Tolerances {
  double stability = 1e-9;  // slack on |tr M| - 2
  double det = 1e-6;        // allowed |det M - 1|
  double bisect = 1e-6;     // boundary location in g
};

struct MathieuMode {
  int sign = 1;             // +1 selects q_+, -1 selects q_-
  double eps_sq = 0.0;      // omega^2 + sign 2 g omega
  double drive_term = 0.0;  // sign 2 omega dg

  static MathieuMode from_params(const ModelParams& params, int sign);
};

struct ExcitationEnergies {
  double eps_plus = 0.0;
  double eps_minus_sq = 0.0;  // negative beyond the static critical point g = omega/2
};

ExcitationEnergies excitation_energies(const ModelParams& params);

struct MonodromyResult {
  std::array<double, 4> matrix{};  // row-major, maps (q, q') at t = 0 to t = T
  double trace = 0.0;
  double det = 0.0;
  bool stable = false;
  std::array<double, 2> multiplier_moduli{};
};

/// Assembles the result from the two fundamental solutions (q,q') started at
/// (1,0) and (0,1). Throws NonConvergence when |det M - 1| > tol.det.
MonodromyResult monodromy_from_columns(double q1, double p1, double q2, double p2,
                                       const Tolerances& tol);

MonodromyResult monodromy(const MathieuMode& mode, double Omega,
                          int steps_per_period = kDefaultStepsPerPeriod,
                          const Tolerances& tol = {},
                          kernels::KernelKind kernel = kernels::select_kernel());

/// Batched form; one call into the SIMD kernel for all modes.
std::vector<MonodromyResult> monodromy_batch(const std::vector<MathieuMode>& modes, double Omega,
                                             int steps_per_period = kDefaultStepsPerPeriod,
                                             const Tolerances& tol = {},
                                             kernels::KernelKind kernel = kernels::select_kernel());

struct CellVerdict {
  bool plus = false;
  bool minus = false;
};

/// Raster over (g, omega): grid.x is g, grid.y is omega. Cells are stored
/// row-major in omega then g, i.e. index = j * x_steps + i.
struct StabilityMap {
  GridSpec grid;
  double dg = 0.0;
  double Omega = 1.0;
  std::vector<CellVerdict> verdicts;
  std::vector<bool> combined;
  std::vector<double> trace_plus;   // NaN where no integration was needed
  std::vector<double> trace_minus;  // NaN where no integration was needed

  [[nodiscard]] std::size_t index(std::size_t i_g, std::size_t j_omega) const {
    return j_omega * grid.x_steps + i_g;
  }
  [[nodiscard]] double unstable_fraction() const;
};

struct MapOptions {
  int steps_per_period = kDefaultStepsPerPeriod;
  Tolerances tol{};
  std::size_t threads = 1;
  kernels::KernelKind kernel = kernels::select_kernel();
};

/// Stability of both modes on every cell. With dg = 0, cells with
/// eps_-^2 < 0 are marked unstable for the minus mode without integration.
StabilityMap stability_map(const ModelParams& params_base, const GridSpec& grid,
                           const MapOptions& options = {});

/// Points (omega, g >= 0) on the resonance kOmega = 2 eps_pm.
struct ResonanceCurves {
  int k = 1;
  std::vector<std::pair<double, double>> plus;
  std::vector<std::pair<double, double>> minus;
};

/// g solving eps_pm(g, omega) = k Omega / 2; negative solutions are returned
/// as-is so callers can filter.
double resonance_coupling(int k, double Omega, double omega, int sign);

ResonanceCurves resonance_curves(int k, double Omega, double omega_min, double omega_max,
                                 std::size_t samples = 201);

/// max over both modes of |tr M| - 2; positive means unstable.
double instability_margin(const ModelParams& params, int steps_per_period = kDefaultStepsPerPeriod,
                          const Tolerances& tol = {},
                          kernels::KernelKind kernel = kernels::select_kernel());

struct ScanOptions {
  std::size_t points = 201;
  int steps_per_period = kDefaultStepsPerPeriod;
  Tolerances tol{};
  kernels::KernelKind kernel = kernels::select_kernel();
};

struct TongueWidth {
  int k = 1;
  double g_left = 0.0;
  double g_right = 0.0;
  double width = 0.0;
};

/// Width in g of the single instability tongue inside [g_lo, g_hi] at the
/// base omega (omega0 = omega). Both scan ends must be stable.
TongueWidth tongue_width(int k, const ModelParams& params_base, double g_lo, double g_hi,
                         const ScanOptions& options = {});

/// Coupling where the stable region at g_lo ends, located by bisection on
/// instability_margin between g_lo (stable) and g_hi (unstable).
double separatrix_coupling(const ModelParams& params_base, double g_lo, double g_hi,
                           const ScanOptions& options = {});

}  // namespace dicke::mathieu
