#pragma once

// Thermodynamic-limit quasienergy surface of the k = 0 effective Hamiltonian,
//
//   E_G(X, Y) = omega r^2 Y^2 (2 - Y^2) - (4g / sqrt2) X Y sqrt(2 - Y^2)
//             + omega X^2 + omega0 (Y^2 - 1) J0(4 dg X / (sqrt2 Omega)),
//
// with r = dg / Omega, X the field and Y the atomic displacement (|Y| <= sqrt2).

#include <array>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "dicke/core.hpp"

namespace dicke::landscape {

inline constexpr double kYLimit = 1.4142135623730951;  // sqrt(2)
inline constexpr double kTolGrad = 1e-10;
inline constexpr double kTolDedup = 1e-6;
inline constexpr double kTolDegeneracyRel = 1e-10;  // times omega0

class SeedGridTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoBracket : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct LandscapePoint {
  double X = 0.0;
  double Y = 0.0;
  double E = 0.0;
};

double energy(double X, double Y, const ModelParams& params);
std::array<double, 2> gradient(double X, double Y, const ModelParams& params);
/// {E_XX, E_XY, E_YY}.
std::array<double, 3> hessian(double X, double Y, const ModelParams& params);

struct Hessian2 {
  std::array<double, 3> h{};  // E_XX, E_XY, E_YY
  std::array<double, 2> eigenvalues{};  // ascending
  [[nodiscard]] double det() const { return h[0] * h[2] - h[1] * h[1]; }
};

/// Closed form at (0, 0): [[2 omega + 4 omega0 r^2, -4 g], [-4 g, 4 omega r^2 + 2 omega0]].
Hessian2 hessian_origin(const ModelParams& params);

struct Minimum {
  LandscapePoint point;
  std::array<double, 2> hessian_eigs{};
  bool is_global = false;
};

struct DescentDiagnostics {
  std::size_t seeds = 0;
  std::size_t captured = 0;         // stopped early inside a known basin
  std::size_t saddles = 0;          // converged, Hessian not positive definite
  std::size_t outside_window = 0;   // converged with |X| beyond the seed window
  std::size_t not_converged = 0;    // iteration budget exhausted or pinned at |Y| = sqrt2
};

struct MinimaSet {
  std::vector<Minimum> minima;  // sorted by energy, then X, then Y
  std::size_t n_local = 0;
  std::size_t n_global = 0;
  DescentDiagnostics diagnostics;
};

struct MinimaOptions {
  double tol_grad = kTolGrad;
  double tol_dedup = kTolDedup;
  double tol_degeneracy_rel = kTolDegeneracyRel;
  double capture_radius = 1e-4;
  int max_iterations = 2000;
  bool check_doubling = true;  // rerun at 2n-1 seeds per axis, compare n_local
};

/// Default seed grid: 41 x 41 over X in [-3, 3], Y in [-1.41, 1.41].
GridSpec default_seed_grid(double x_max = 3.0, std::size_t steps = 41);

/// Seed grid with twice the density: 2n - 1 points per axis on the same box.
GridSpec doubled(const GridSpec& seeds);

/// Multistart descent (Armijo backtracking along -grad, Newton direction where
/// the Hessian is positive definite). Throws SeedGridTooCoarse when
/// check_doubling is set and the doubled grid changes n_local.
MinimaSet find_minima(const ModelParams& params, const GridSpec& seeds,
                      const MinimaOptions& options = {});

struct DescentTrace {
  std::vector<LandscapePoint> path;  // seed followed by every accepted step
  bool converged = false;
};

/// Single descent run as used by find_minima, with its accepted iterates.
DescentTrace descend_from(double X, double Y, const ModelParams& params,
                          const MinimaOptions& options = {});

enum class PhaseKind { Normal, Superradiant, Multistable };
std::string_view phase_name(PhaseKind kind);

struct PhaseLabel {
  PhaseKind kind = PhaseKind::Normal;
  std::size_t n_local = 0;
  std::size_t n_global = 0;
  bool global_at_origin = false;
};

PhaseLabel classify_phase(const MinimaSet& minima, double tol_origin = kTolDedup);

struct PhaseCell {
  PhaseLabel label;
  bool seed_grid_too_coarse = false;  // doubling changed n_local; label from the finer grid
};

/// Raster over (g, dg): grid.x is g, grid.y is dg, index = j * x_steps + i.
struct PhaseDiagram {
  GridSpec grid;
  ModelParams base;
  std::vector<PhaseCell> cells;
  std::vector<std::pair<double, double>> second_order_line;  // (dg, g_c) from the origin Hessian
  std::vector<std::pair<double, double>> first_order_line;   // (g, dg*) located by bisection

  [[nodiscard]] std::size_t index(std::size_t i_g, std::size_t j_dg) const {
    return j_dg * grid.x_steps + i_g;
  }
};

struct PhaseDiagramOptions {
  GridSpec seeds = default_seed_grid();
  MinimaOptions minima{};
  std::size_t threads = 1;
  bool locate_first_order = true;
};

PhaseDiagram phase_diagram(const ModelParams& base, const GridSpec& grid,
                           const PhaseDiagramOptions& options = {});

/// Coupling where det(hessian_origin) vanishes at the base omega, omega0, dg.
double second_order_coupling(const ModelParams& params);

struct FirstOrderResult {
  double dg_star = 0.0;
  double delta_e = 0.0;          // E(best off-origin minimum) - E(0, 0) at dg_star
  std::size_t n_degenerate = 0;  // minima within the degeneracy tolerance of the lowest
  MinimaSet minima;              // at dg_star
};

/// Bisection in dg of E(best off-origin minimum) - E(0, 0). The bracket ends
/// must have the global minimum off and at the origin, in either order.
FirstOrderResult first_order_boundary(double g, const ModelParams& base, double dg_lo,
                                      double dg_hi, const GridSpec& seeds = default_seed_grid(),
                                      const MinimaOptions& options = {});

struct SectionPoint {
  double Y = 0.0;
  double X = 0.0;  // X[Y], minimiser of E over the X window
  double E = 0.0;
};

struct SectionOptions {
  double x_max = 3.0;
  double y_margin = 1e-3;
  std::size_t x_samples = 2001;
};

/// Valley-floor section E_G(X[Y], Y) with X[Y] the per-Y minimiser over X.
std::vector<SectionPoint> section(const ModelParams& params, std::size_t n_samples,
                                  const SectionOptions& options = {});

}  // namespace dicke::landscape
