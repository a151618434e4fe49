#include "dicke/mathieu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dicke::mathieu {

MathieuMode MathieuMode::from_params(const ModelParams& params, int sign) {
  if (sign != 1 && sign != -1) throw InvalidArgument("mode sign must be +1 or -1");
  const double w = params.omega;
  return {sign, w * w + sign * 2.0 * params.g * w, sign * 2.0 * w * params.dg};
}

ExcitationEnergies excitation_energies(const ModelParams& params) {
  const double w = params.omega;
  return {std::sqrt(w * w + 2.0 * params.g * w), w * w - 2.0 * params.g * w};
}

MonodromyResult monodromy_from_columns(double q1, double p1, double q2, double p2,
                                       const Tolerances& tol) {
  MonodromyResult r;
  r.matrix = {q1, q2, p1, p2};
  r.trace = q1 + p2;
  r.det = q1 * p2 - q2 * p1;
  if (!(std::abs(r.det - 1.0) <= tol.det)) {
    std::ostringstream msg;
    msg << "monodromy: |det M - 1| = " << std::abs(r.det - 1.0) << " exceeds " << tol.det
        << " (increase steps_per_period)";
    throw NonConvergence(msg.str());
  }
  r.stable = std::abs(r.trace) <= 2.0 + tol.stability;

  const double disc = r.trace * r.trace - 4.0 * r.det;
  if (disc < 0.0) {
    const double m = std::sqrt(std::abs(r.det));
    r.multiplier_moduli = {m, m};
  } else {
    const double s = std::sqrt(disc);
    const double l1 = 0.5 * (r.trace + s);
    const double l2 = 0.5 * (r.trace - s);
    r.multiplier_moduli = {std::abs(l1), std::abs(l2)};
  }
  return r;
}

std::vector<MonodromyResult> monodromy_batch(const std::vector<MathieuMode>& modes, double Omega,
                                             int steps_per_period, const Tolerances& tol,
                                             kernels::KernelKind kernel) {
  if (steps_per_period < kMinStepsPerPeriod)
    throw InvalidArgument("steps_per_period must be >= 100");
  if (!(Omega > 0.0)) throw InvalidArgument("Omega must be positive");

  // Two lanes per mode: fundamental solutions from (1,0) and (0,1).
  const std::size_t n = modes.size();
  std::vector<double> a(2 * n), b(2 * n), q(2 * n), p(2 * n);
  for (std::size_t m = 0; m < n; ++m) {
    a[2 * m] = a[2 * m + 1] = modes[m].eps_sq;
    b[2 * m] = b[2 * m + 1] = modes[m].drive_term;
    q[2 * m] = 1.0;
    p[2 * m] = 0.0;
    q[2 * m + 1] = 0.0;
    p[2 * m + 1] = 1.0;
  }
  kernels::integrate_period(kernel, Omega, steps_per_period, {a, b, q, p});

  std::vector<MonodromyResult> out;
  out.reserve(n);
  for (std::size_t m = 0; m < n; ++m)
    out.push_back(monodromy_from_columns(q[2 * m], p[2 * m], q[2 * m + 1], p[2 * m + 1], tol));
  return out;
}

MonodromyResult monodromy(const MathieuMode& mode, double Omega, int steps_per_period,
                          const Tolerances& tol, kernels::KernelKind kernel) {
  return monodromy_batch({mode}, Omega, steps_per_period, tol, kernel).front();
}

double StabilityMap::unstable_fraction() const {
  if (combined.empty()) return 0.0;
  std::size_t unstable = 0;
  for (bool c : combined) unstable += c ? 0 : 1;
  return static_cast<double>(unstable) / static_cast<double>(combined.size());
}

StabilityMap stability_map(const ModelParams& params_base, const GridSpec& grid,
                           const MapOptions& options) {
  params_base.validate();
  grid.validate();
  if (!(grid.y_min > 0.0)) throw InvalidArgument("stability_map: omega axis must be positive");
  if (grid.x_min < 0.0) throw InvalidArgument("stability_map: g axis must be non-negative");

  StabilityMap map;
  map.grid = grid;
  map.dg = params_base.dg;
  map.Omega = params_base.Omega;
  const std::size_t cells = grid.size();
  map.verdicts.resize(cells);
  map.combined.resize(cells);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  map.trace_plus.assign(cells, nan);
  map.trace_minus.assign(cells, nan);

  // One omega row per task; each row is a single batched kernel call.
  const std::size_t rows = grid.y_steps;
  const std::size_t cols = grid.x_steps;
  std::vector<std::vector<MonodromyResult>> row_results(rows);
  std::vector<std::vector<char>> row_skipped(rows);

  parallel_for(rows, options.threads, [&](std::size_t j) {
    ModelParams p = params_base;
    p.omega = grid.y_at(j);
    p.omega0 = p.omega;
    std::vector<MathieuMode> modes;
    std::vector<char> skipped(cols, 0);
    modes.reserve(2 * cols);
    for (std::size_t i = 0; i < cols; ++i) {
      p.g = grid.x_at(i);
      modes.push_back(MathieuMode::from_params(p, +1));
      const auto minus = MathieuMode::from_params(p, -1);
      if (p.dg == 0.0 && minus.eps_sq < 0.0) {
        skipped[i] = 1;
      } else {
        modes.push_back(minus);
      }
    }
    try {
      row_results[j] = monodromy_batch(modes, p.Omega, options.steps_per_period, options.tol,
                                       options.kernel);
    } catch (const NonConvergence& e) {
      std::ostringstream msg;
      msg << e.what() << " in row omega=" << p.omega << " (g in [" << grid.x_min << ", "
          << grid.x_max << "])";
      throw NonConvergence(msg.str());
    }
    row_skipped[j] = std::move(skipped);
  });

  for (std::size_t j = 0; j < rows; ++j) {
    std::size_t r = 0;
    for (std::size_t i = 0; i < cols; ++i) {
      const std::size_t idx = map.index(i, j);
      const auto& plus = row_results[j][r++];
      map.trace_plus[idx] = plus.trace;
      map.verdicts[idx].plus = plus.stable;
      if (row_skipped[j][i]) {
        map.verdicts[idx].minus = false;
      } else {
        const auto& minus = row_results[j][r++];
        map.trace_minus[idx] = minus.trace;
        map.verdicts[idx].minus = minus.stable;
      }
      map.combined[idx] = map.verdicts[idx].plus && map.verdicts[idx].minus;
    }
  }
  return map;
}

double resonance_coupling(int k, double Omega, double omega, int sign) {
  const double target = 0.25 * k * k * Omega * Omega;
  // eps_pm^2 = omega^2 pm 2 g omega = target
  return sign * (target - omega * omega) / (2.0 * omega);
}

ResonanceCurves resonance_curves(int k, double Omega, double omega_min, double omega_max,
                                 std::size_t samples) {
  if (k < 1) throw InvalidArgument("resonance_curves: k must be >= 1");
  if (!(omega_min > 0.0) || !(omega_min < omega_max) || samples < 2)
    throw InvalidArgument("resonance_curves: need 0 < omega_min < omega_max and samples >= 2");
  ResonanceCurves curves;
  curves.k = k;
  for (std::size_t s = 0; s < samples; ++s) {
    const double w = omega_min + (omega_max - omega_min) * static_cast<double>(s) /
                                     static_cast<double>(samples - 1);
    const double gp = resonance_coupling(k, Omega, w, +1);
    const double gm = resonance_coupling(k, Omega, w, -1);
    if (gp >= 0.0) curves.plus.emplace_back(w, gp);
    if (gm >= 0.0) curves.minus.emplace_back(w, gm);
  }
  if (curves.plus.empty() && curves.minus.empty())
    throw EmptyCurve("resonance_curves: no omega in range gives g >= 0");
  return curves;
}

double instability_margin(const ModelParams& params, int steps_per_period, const Tolerances& tol,
                          kernels::KernelKind kernel) {
  const auto r = monodromy_batch(
      {MathieuMode::from_params(params, +1), MathieuMode::from_params(params, -1)}, params.Omega,
      steps_per_period, tol, kernel);
  return std::max(std::abs(r[0].trace), std::abs(r[1].trace)) - 2.0;
}

namespace {

// Bisects the sign change of instability_margin between a (margin <= 0 side
// when stable_left) and b.
double bisect_margin(ModelParams p, double a, double b, bool stable_at_a, const ScanOptions& opt) {
  auto margin = [&](double g) {
    p.g = g;
    return instability_margin(p, opt.steps_per_period, opt.tol, opt.kernel);
  };
  while (b - a > opt.tol.bisect) {
    const double mid = 0.5 * (a + b);
    const bool stable_mid = margin(mid) <= 0.0;
    if (stable_mid == stable_at_a) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TongueWidth tongue_width(int k, const ModelParams& params_base, double g_lo, double g_hi,
                         const ScanOptions& options) {
  params_base.validate();
  if (!(g_lo < g_hi) || g_lo < 0.0) throw InvalidArgument("tongue_width: need 0 <= g_lo < g_hi");
  if (options.points < 3) throw InvalidArgument("tongue_width: need at least 3 scan points");

  ModelParams p = params_base;
  p.omega0 = p.omega;

  const std::size_t n = options.points;
  std::vector<double> gs(n);
  std::vector<MathieuMode> modes;
  modes.reserve(2 * n);
  for (std::size_t s = 0; s < n; ++s) {
    gs[s] = g_lo + (g_hi - g_lo) * static_cast<double>(s) / static_cast<double>(n - 1);
    p.g = gs[s];
    modes.push_back(MathieuMode::from_params(p, +1));
    modes.push_back(MathieuMode::from_params(p, -1));
  }
  const auto res =
      monodromy_batch(modes, p.Omega, options.steps_per_period, options.tol, options.kernel);
  std::vector<bool> unstable(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double m = std::max(std::abs(res[2 * s].trace), std::abs(res[2 * s + 1].trace)) - 2.0;
    unstable[s] = m > options.tol.stability;
  }
  if (unstable.front() || unstable.back())
    throw InvalidArgument("tongue_width: scan must begin and end in stable cells");

  std::size_t runs = 0;
  std::size_t first = 0;
  std::size_t last = 0;
  for (std::size_t s = 1; s < n; ++s) {
    if (unstable[s] && !unstable[s - 1]) {
      ++runs;
      first = s;
    }
    if (unstable[s]) last = s;
  }
  if (runs == 0) throw NoTongue("tongue_width: no unstable cell in scan");
  if (runs > 1) throw MultipleTongues("tongue_width: more than one unstable run in scan");

  TongueWidth w;
  w.k = k;
  w.g_left = bisect_margin(p, gs[first - 1], gs[first], true, options);
  w.g_right = bisect_margin(p, gs[last], gs[last + 1], false, options);
  w.width = w.g_right - w.g_left;
  return w;
}

double separatrix_coupling(const ModelParams& params_base, double g_lo, double g_hi,
                           const ScanOptions& options) {
  params_base.validate();
  ModelParams p = params_base;
  p.omega0 = p.omega;
  p.g = g_lo;
  const double m_lo = instability_margin(p, options.steps_per_period, options.tol, options.kernel);
  p.g = g_hi;
  const double m_hi = instability_margin(p, options.steps_per_period, options.tol, options.kernel);
  if (!(m_lo <= 0.0 && m_hi > 0.0))
    throw InvalidArgument("separatrix_coupling: bracket must go from stable to unstable");
  return bisect_margin(p, g_lo, g_hi, true, options);
}

}  // namespace dicke::mathieu
