#pragma once

// Shared parameter types for the driven Dicke model toolkit.
//
// Units: hbar = 1 and every frequency is an absolute energy. Ratios such as
// g/Omega only appear at the CLI boundary.

#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dicke {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Errors. InvalidArgument maps to CLI exit code 2, NumericalError to 3.
// ---------------------------------------------------------------------------

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested effective-Hamiltonian variant has no closed form.
class UnsupportedVariant : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------

/// Static coupling, drive and frequencies of
///   H(t) = omega a^dag a + omega0 J_z + g(t)/sqrt(N) (a^dag + a)(J_+ + J_-),
///   g(t) = g + dg cos(Omega t).
struct ModelParams {
  double omega = 1.0;   // field frequency
  double omega0 = 1.0;  // atomic splitting
  double g = 0.0;       // static coupling
  double dg = 0.0;      // drive amplitude
  double Omega = 1.0;   // drive frequency

  /// Throws InvalidArgument unless Omega, omega, omega0 > 0 and g, dg >= 0.
  void validate() const;

  /// Drive strength in units of the drive frequency.
  [[nodiscard]] double drive_ratio() const { return dg / Omega; }
  [[nodiscard]] double period() const { return kTwoPi / Omega; }
};

struct Detunings {
  int k = 0;
  double delta_k = 0.0;   // omega  - k Omega / 2
  double delta0_k = 0.0;  // omega0 - k Omega / 2
};

Detunings detunings(const ModelParams& params, int k);

/// Rectangular raster over two named parameters. Points are inclusive of both
/// ends: x_i = x_min + i (x_max - x_min) / (x_steps - 1).
struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t x_steps = 2;
  double y_min = 0.0;
  double y_max = 1.0;
  std::size_t y_steps = 2;

  void validate() const;

  [[nodiscard]] double x_at(std::size_t i) const;
  [[nodiscard]] double y_at(std::size_t j) const;
  [[nodiscard]] double dx() const { return (x_max - x_min) / static_cast<double>(x_steps - 1); }
  [[nodiscard]] double dy() const { return (y_max - y_min) / static_cast<double>(y_steps - 1); }
  [[nodiscard]] std::size_t size() const { return x_steps * y_steps; }
};

/// Number of worker threads used by sweeps: DICKE_THREADS if set, else 1.
std::size_t default_thread_count();

/// Runs fn(i) for i in [0, n) on `threads` workers. Each index is visited
/// exactly once; callers write only to slot i so results are deterministic.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace dicke
