#include "dicke/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dicke::landscape {

namespace {

constexpr double kTwoSqrt2 = 2.8284271247461903;

struct Terms {
  double w, w0, g, r2, c;
};

Terms terms(const ModelParams& p) {
  const double r = p.dg / p.Omega;
  return {p.omega, p.omega0, p.g, r * r, kTwoSqrt2 * r};
}

void check_domain(double Y, bool open) {
  const bool bad = open ? !(std::abs(Y) < kYLimit) : !(std::abs(Y) <= kYLimit);
  if (bad) {
    std::ostringstream msg;
    msg << "landscape: Y = " << Y << " outside " << (open ? "open" : "closed") << " domain |Y| "
        << (open ? "<" : "<=") << " sqrt(2)";
    throw DomainError(msg.str());
  }
}

double energy_unchecked(double X, double Y, const Terms& t) {
  const double y2 = Y * Y;
  const double s = std::sqrt(std::max(0.0, 2.0 - y2));
  return t.w * t.r2 * y2 * (2.0 - y2) - kTwoSqrt2 * t.g * X * Y * s + t.w * X * X +
         t.w0 * (y2 - 1.0) * ::j0(t.c * X);
}

struct Eval {
  double E = 0.0;
  double gx = 0.0, gy = 0.0;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
};

// J1'(u) = J0(u) - J1(u)/u, with its series near zero.
double j1_prime(double u, double j0u, double j1u) {
  if (std::abs(u) < 1e-4) return 0.5 - 0.1875 * u * u;
  return j0u - j1u / u;
}

Eval evaluate(double X, double Y, const Terms& t) {
  const double y2 = Y * Y;
  const double s2 = 2.0 - y2;
  const double s = std::sqrt(s2);
  const double u = t.c * X;
  const double J0 = ::j0(u);
  const double J1 = ::j1(u);
  const double a = kTwoSqrt2 * t.g;
  Eval e;
  e.E = t.w * t.r2 * y2 * s2 - a * X * Y * s + t.w * X * X + t.w0 * (y2 - 1.0) * J0;
  e.gx = -a * Y * s + 2.0 * t.w * X - t.w0 * (y2 - 1.0) * t.c * J1;
  e.gy = t.w * t.r2 * (4.0 * Y - 4.0 * y2 * Y) - a * X * (2.0 - 2.0 * y2) / s +
         2.0 * t.w0 * Y * J0;
  e.hxx = 2.0 * t.w - t.w0 * (y2 - 1.0) * t.c * t.c * j1_prime(u, J0, J1);
  e.hxy = -a * (2.0 - 2.0 * y2) / s - 2.0 * t.w0 * Y * t.c * J1;
  e.hyy = t.w * t.r2 * (4.0 - 12.0 * y2) - a * X * Y * (2.0 * y2 - 6.0) / (s2 * s) +
          2.0 * t.w0 * J0;
  return e;
}

std::array<double, 2> sym_eigs(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean - rad, mean + rad};
}

enum class Outcome { Converged, Captured, NotConverged };

struct Known {
  double X, Y;
};

// Armijo backtracking descent. Newton direction when the Hessian is positive
// definite, scaled steepest descent otherwise. Every accepted step lowers E
// (up to a few ulps once the gradient is at roundoff level).
Outcome descend(double& X, double& Y, const Terms& t, const MinimaOptions& opt,
                const std::vector<Known>& known, std::vector<LandscapePoint>* path = nullptr) {
  const double r2cap = opt.capture_radius * opt.capture_radius;
  Eval e = evaluate(X, Y, t);
  if (path) path->push_back({X, Y, e.E});
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double gnorm = std::hypot(e.gx, e.gy);
    for (const auto& k : known) {
      const double dx = X - k.X;
      const double dy = Y - k.Y;
      if (dx * dx + dy * dy < r2cap) return Outcome::Captured;
    }
    const double det = e.hxx * e.hyy - e.hxy * e.hxy;
    const bool newton = e.hxx > 0.0 && det > 0.0;
    double dx, dy;
    if (newton) {
      dx = -(e.hyy * e.gx - e.hxy * e.gy) / det;
      dy = -(-e.hxy * e.gx + e.hxx * e.gy) / det;
    } else {
      const double scale =
          std::max(std::sqrt(e.hxx * e.hxx + 2.0 * e.hxy * e.hxy + e.hyy * e.hyy), 1e-300);
      dx = -e.gx / scale;
      dy = -e.gy / scale;
    }
    // Converged once the gradient is below tolerance and, where the Hessian is
    // positive definite, the Newton correction is far below the dedup radius
    // (flat quartic minima otherwise stop while still spread out).
    const bool small_gradient = gnorm < opt.tol_grad;
    if (small_gradient && (!newton || std::hypot(dx, dy) < 1e-2 * opt.tol_dedup))
      return Outcome::Converged;
    const double slope = e.gx * dx + e.gy * dy;
    if (!(slope < 0.0)) return small_gradient ? Outcome::Converged : Outcome::NotConverged;

    bool accepted = false;
    double step = 1.0;
    for (int bt = 0; bt < 80; ++bt, step *= 0.5) {
      const double xn = X + step * dx;
      const double yn = Y + step * dy;
      if (!(std::abs(yn) < kYLimit)) continue;
      const double En = energy_unchecked(xn, yn, t);
      if (En <= e.E + 1e-4 * step * slope) {
        X = xn;
        Y = yn;
        e = evaluate(X, Y, t);
        if (path) path->push_back({X, Y, e.E});
        accepted = true;
        break;
      }
      if (newton && En <= e.E + 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(e.E) + 1.0)) {
        const Eval en = evaluate(xn, yn, t);
        if (std::hypot(en.gx, en.gy) < gnorm) {
          X = xn;
          Y = yn;
          e = en;
          if (path) path->push_back({X, Y, e.E});
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) return small_gradient ? Outcome::Converged : Outcome::NotConverged;
    // Runs heading for the excluded boundary |Y| = sqrt2 never converge.
    if (2.0 - Y * Y < 1e-12) return Outcome::NotConverged;
  }
  return Outcome::NotConverged;
}

bool at_origin(const LandscapePoint& p, double tol) { return std::hypot(p.X, p.Y) < tol; }

MinimaSet search(const ModelParams& params, const GridSpec& seeds, const MinimaOptions& opt) {
  const Terms t = terms(params);
  const double x_window = std::max(std::abs(seeds.x_min), std::abs(seeds.x_max)) + opt.tol_dedup;
  MinimaSet set;
  std::vector<Known> known;
  std::vector<double> gnorms;

  for (std::size_t j = 0; j < seeds.y_steps; ++j) {
    for (std::size_t i = 0; i < seeds.x_steps; ++i) {
      ++set.diagnostics.seeds;
      double X = seeds.x_at(i);
      double Y = seeds.y_at(j);
      if (!(std::abs(Y) < kYLimit)) {
        ++set.diagnostics.not_converged;
        continue;
      }
      const Outcome out = descend(X, Y, t, opt, known);
      if (out == Outcome::Captured) {
        ++set.diagnostics.captured;
        continue;
      }
      if (out == Outcome::NotConverged) {
        ++set.diagnostics.not_converged;
        continue;
      }
      const Eval e = evaluate(X, Y, t);
      const auto eig = sym_eigs(e.hxx, e.hxy, e.hyy);
      if (!(eig[0] > 1e-12)) {
        ++set.diagnostics.saddles;
        continue;
      }
      if (std::abs(X) > x_window) {
        ++set.diagnostics.outside_window;
        continue;
      }
      const double gn = std::hypot(e.gx, e.gy);
      bool duplicate = false;
      for (std::size_t m = 0; m < set.minima.size(); ++m) {
        auto& p = set.minima[m].point;
        if (std::hypot(p.X - X, p.Y - Y) < opt.tol_dedup) {
          duplicate = true;
          if (gn < gnorms[m]) {
            p = {X, Y, e.E};
            set.minima[m].hessian_eigs = eig;
            gnorms[m] = gn;
            known[m] = {X, Y};
          }
          break;
        }
      }
      if (!duplicate) {
        set.minima.push_back({{X, Y, e.E}, eig, false});
        gnorms.push_back(gn);
        known.push_back({X, Y});
      }
    }
  }

  // Snap to the exact origin and close the set under (X, Y) -> (-X, -Y): each
  // parity pair is rebuilt from its better-converged member.
  std::vector<Minimum> reps;
  std::vector<double> rep_gn;
  bool origin = false;
  for (std::size_t m = 0; m < set.minima.size(); ++m) {
    auto mm = set.minima[m];
    if (at_origin(mm.point, opt.tol_dedup)) {
      origin = true;
      continue;
    }
    if (mm.point.X < 0.0 || (mm.point.X == 0.0 && mm.point.Y < 0.0)) {
      mm.point.X = -mm.point.X;
      mm.point.Y = -mm.point.Y;
    }
    bool merged = false;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if (std::hypot(reps[r].point.X - mm.point.X, reps[r].point.Y - mm.point.Y) < opt.tol_dedup) {
        merged = true;
        if (gnorms[m] < rep_gn[r]) {
          reps[r] = mm;
          rep_gn[r] = gnorms[m];
        }
        break;
      }
    }
    if (!merged) {
      reps.push_back(mm);
      rep_gn.push_back(gnorms[m]);
    }
  }
  set.minima.clear();
  if (origin) {
    const Eval e = evaluate(0.0, 0.0, t);
    set.minima.push_back({{0.0, 0.0, e.E}, sym_eigs(e.hxx, e.hxy, e.hyy), false});
  }
  for (const auto& r : reps) {
    set.minima.push_back(r);
    Minimum partner = r;
    partner.point.X = -r.point.X;
    partner.point.Y = -r.point.Y;
    partner.point.E = energy_unchecked(partner.point.X, partner.point.Y, t);
    set.minima.push_back(partner);
  }

  std::sort(set.minima.begin(), set.minima.end(), [](const Minimum& a, const Minimum& b) {
    if (a.point.E != b.point.E) return a.point.E < b.point.E;
    if (a.point.X != b.point.X) return a.point.X < b.point.X;
    return a.point.Y < b.point.Y;
  });
  set.n_local = set.minima.size();
  if (!set.minima.empty()) {
    const double tol = opt.tol_degeneracy_rel * params.omega0;
    const double lowest = set.minima.front().point.E;
    for (auto& m : set.minima) {
      m.is_global = m.point.E <= lowest + tol;
      set.n_global += m.is_global ? 1 : 0;
    }
  }
  return set;
}

struct CheckedMinima {
  MinimaSet coarse;
  MinimaSet fine;
  bool mismatch = false;
};

CheckedMinima search_checked(const ModelParams& params, const GridSpec& seeds,
                             const MinimaOptions& opt) {
  CheckedMinima r;
  r.coarse = search(params, seeds, opt);
  if (opt.check_doubling) {
    r.fine = search(params, doubled(seeds), opt);
    r.mismatch = r.fine.n_local != r.coarse.n_local;
  }
  return r;
}

}  // namespace

double energy(double X, double Y, const ModelParams& params) {
  check_domain(Y, false);
  return energy_unchecked(X, Y, terms(params));
}

std::array<double, 2> gradient(double X, double Y, const ModelParams& params) {
  check_domain(Y, true);
  const Eval e = evaluate(X, Y, terms(params));
  return {e.gx, e.gy};
}

std::array<double, 3> hessian(double X, double Y, const ModelParams& params) {
  check_domain(Y, true);
  const Eval e = evaluate(X, Y, terms(params));
  return {e.hxx, e.hxy, e.hyy};
}

Hessian2 hessian_origin(const ModelParams& params) {
  const Terms t = terms(params);
  Hessian2 h;
  h.h = {2.0 * t.w + 4.0 * t.w0 * t.r2, -4.0 * t.g, 4.0 * t.w * t.r2 + 2.0 * t.w0};
  h.eigenvalues = sym_eigs(h.h[0], h.h[1], h.h[2]);
  return h;
}

double second_order_coupling(const ModelParams& params) {
  const Terms t = terms(params);
  return 0.5 * std::sqrt((t.w + 2.0 * t.w0 * t.r2) * (t.w0 + 2.0 * t.w * t.r2));
}

GridSpec default_seed_grid(double x_max, std::size_t steps) {
  return {-x_max, x_max, steps, -1.41, 1.41, steps};
}

GridSpec doubled(const GridSpec& seeds) {
  GridSpec d = seeds;
  d.x_steps = 2 * seeds.x_steps - 1;
  d.y_steps = 2 * seeds.y_steps - 1;
  return d;
}

MinimaSet find_minima(const ModelParams& params, const GridSpec& seeds,
                      const MinimaOptions& options) {
  params.validate();
  seeds.validate();
  if (std::max(std::abs(seeds.y_min), std::abs(seeds.y_max)) >= kYLimit)
    throw DomainError("find_minima: seed grid must satisfy |Y| < sqrt(2)");
  auto r = search_checked(params, seeds, options);
  if (r.mismatch) {
    std::ostringstream msg;
    msg << "find_minima: n_local changed from " << r.coarse.n_local << " to " << r.fine.n_local
        << " when doubling the seed grid (g=" << params.g << ", dg=" << params.dg << ")";
    throw SeedGridTooCoarse(msg.str());
  }
  return std::move(r.coarse);
}

DescentTrace descend_from(double X, double Y, const ModelParams& params,
                          const MinimaOptions& options) {
  params.validate();
  check_domain(Y, true);
  DescentTrace tr;
  tr.converged =
      descend(X, Y, terms(params), options, {}, &tr.path) == Outcome::Converged;
  return tr;
}

std::string_view phase_name(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::Normal:
      return "normal";
    case PhaseKind::Superradiant:
      return "superradiant";
    case PhaseKind::Multistable:
      return "multistable";
  }
  return "unknown";
}

PhaseLabel classify_phase(const MinimaSet& minima, double tol_origin) {
  PhaseLabel label;
  label.n_local = minima.n_local;
  label.n_global = minima.n_global;
  bool origin_present = false;
  for (const auto& m : minima.minima) {
    if (at_origin(m.point, tol_origin)) {
      origin_present = true;
      label.global_at_origin = m.is_global;
    }
  }
  if (label.n_local == 1 && origin_present) {
    label.kind = PhaseKind::Normal;
  } else if (label.n_local == 2 && label.n_global == 2 && !label.global_at_origin) {
    label.kind = PhaseKind::Superradiant;
  } else {
    label.kind = PhaseKind::Multistable;
  }
  return label;
}

namespace {

// E(best off-origin minimum) - E(0, 0); +inf when the origin is the only minimum.
double origin_gap(const MinimaSet& set, const ModelParams& p) {
  const double e0 = energy(0.0, 0.0, p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : set.minima)
    if (!at_origin(m.point, kTolDedup)) best = std::min(best, m.point.E);
  return best - e0;
}

}  // namespace

FirstOrderResult first_order_boundary(double g, const ModelParams& base, double dg_lo,
                                      double dg_hi, const GridSpec& seeds,
                                      const MinimaOptions& options) {
  if (!(dg_lo >= 0.0) || !(dg_lo < dg_hi))
    throw InvalidArgument("first_order_boundary: need 0 <= dg_lo < dg_hi");
  MinimaOptions opt = options;
  opt.check_doubling = false;
  ModelParams p = base;
  p.g = g;
  auto gap_at = [&](double dg, MinimaSet* keep) {
    p.dg = dg;
    MinimaSet s = find_minima(p, seeds, opt);
    const double gap = origin_gap(s, p);
    if (keep) *keep = std::move(s);
    return gap;
  };
  const double f_lo = gap_at(dg_lo, nullptr);
  const double f_hi = gap_at(dg_hi, nullptr);
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    std::ostringstream msg;
    msg << "first_order_boundary: global minimum is " << (f_lo < 0.0 ? "off" : "at")
        << " the origin at both ends of [" << dg_lo << ", " << dg_hi << "] for g=" << g;
    throw NoBracket(msg.str());
  }
  const bool lo_off = f_lo < 0.0;
  const double tol = opt.tol_degeneracy_rel * base.omega0;
  double a = dg_lo;
  double b = dg_hi;
  FirstOrderResult res;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    MinimaSet s;
    const double f = gap_at(mid, &s);
    res.dg_star = mid;
    res.delta_e = f;
    res.minima = std::move(s);
    if (std::abs(f) < tol || mid == a || mid == b) break;
    if ((f < 0.0) == lo_off) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double lowest = res.minima.minima.empty() ? 0.0 : res.minima.minima.front().point.E;
  for (const auto& m : res.minima.minima)
    if (m.point.E <= lowest + tol) ++res.n_degenerate;
  return res;
}

PhaseDiagram phase_diagram(const ModelParams& base, const GridSpec& grid,
                           const PhaseDiagramOptions& options) {
  base.validate();
  grid.validate();
  if (grid.x_min < 0.0 || grid.y_min < 0.0)
    throw InvalidArgument("phase_diagram: g and dg axes must be non-negative");
  options.seeds.validate();

  PhaseDiagram pd;
  pd.grid = grid;
  pd.base = base;
  pd.cells.resize(grid.size());
  parallel_for(grid.y_steps, options.threads, [&](std::size_t j) {
    ModelParams p = base;
    p.dg = grid.y_at(j);
    for (std::size_t i = 0; i < grid.x_steps; ++i) {
      p.g = grid.x_at(i);
      const auto r = search_checked(p, options.seeds, options.minima);
      PhaseCell& cell = pd.cells[pd.index(i, j)];
      cell.seed_grid_too_coarse = r.mismatch;
      cell.label = classify_phase(r.mismatch ? r.fine : r.coarse);
    }
  });

  for (std::size_t j = 0; j < grid.y_steps; ++j) {
    ModelParams p = base;
    p.dg = grid.y_at(j);
    pd.second_order_line.emplace_back(p.dg, second_order_coupling(p));
  }

  if (options.locate_first_order) {
    std::vector<std::pair<double, double>> found(grid.x_steps,
                                                 {std::numeric_limits<double>::quiet_NaN(), 0.0});
    parallel_for(grid.x_steps, options.threads, [&](std::size_t i) {
      for (std::size_t j = 0; j + 1 < grid.y_steps; ++j) {
        const auto& lo = pd.cells[pd.index(i, j)].label;
        const auto& hi = pd.cells[pd.index(i, j + 1)].label;
        if (lo.global_at_origin == hi.global_at_origin) continue;
        const bool continuous =
            (lo.kind == PhaseKind::Normal && hi.kind == PhaseKind::Superradiant) ||
            (lo.kind == PhaseKind::Superradiant && hi.kind == PhaseKind::Normal);
        if (continuous) continue;
        try {
          const auto r = first_order_boundary(grid.x_at(i), base, grid.y_at(j), grid.y_at(j + 1),
                                              options.seeds, options.minima);
          found[i] = {grid.x_at(i), r.dg_star};
        } catch (const NoBracket&) {
        }
        break;
      }
    });
    for (const auto& f : found)
      if (!std::isnan(f.first)) pd.first_order_line.push_back(f);
  }
  return pd;
}

std::vector<SectionPoint> section(const ModelParams& params, std::size_t n_samples,
                                  const SectionOptions& options) {
  params.validate();
  if (n_samples < 2) throw InvalidArgument("section: need at least 2 samples");
  if (!(options.y_margin > 0.0) || !(options.y_margin < kYLimit))
    throw InvalidArgument("section: y_margin must lie in (0, sqrt 2)");
  if (!(options.x_max > 0.0) || options.x_samples < 3)
    throw InvalidArgument("section: need x_max > 0 and x_samples >= 3");
  const Terms t = terms(params);
  const double y_lim = kYLimit - options.y_margin;
  const double dx = 2.0 * options.x_max / static_cast<double>(options.x_samples - 1);
  std::vector<SectionPoint> out;
  out.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double Y = (s + 1 == n_samples)
                         ? y_lim
                         : -y_lim + 2.0 * y_lim * static_cast<double>(s) /
                                        static_cast<double>(n_samples - 1);
    std::size_t best = 0;
    double best_e = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < options.x_samples; ++i) {
      const double X = -options.x_max + dx * static_cast<double>(i);
      const double e = energy_unchecked(X, Y, t);
      if (e < best_e) {
        best_e = e;
        best = i;
      }
    }
    // Golden-section refinement on the bracketing cells.
    double a = -options.x_max + dx * static_cast<double>(best == 0 ? 0 : best - 1);
    double b = -options.x_max + dx * static_cast<double>(std::min(best + 1, options.x_samples - 1));
    const double phi = 0.6180339887498949;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = energy_unchecked(c, Y, t);
    double fd = energy_unchecked(d, Y, t);
    while (b - a > 1e-12) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = energy_unchecked(c, Y, t);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = energy_unchecked(d, Y, t);
      }
    }
    double X = 0.5 * (a + b);
    double E = energy_unchecked(X, Y, t);
    const double X_grid = -options.x_max + dx * static_cast<double>(best);
    if (best_e < E) {
      X = X_grid;
      E = best_e;
    }
    out.push_back({Y, X, E});
  }
  return out;
}

}  // namespace dicke::landscape
