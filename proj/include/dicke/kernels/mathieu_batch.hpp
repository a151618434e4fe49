#pragma once

// Batched fixed-step RK4 integration of independent Mathieu oscillators
//
//   q'' + (stiffness + drive * cos(Omega t)) q = 0
//
// over one drive period. Every lane shares Omega and the step grid, so the
// cosine samples are tabulated once and the lanes map onto SIMD registers.
// All variants perform the same IEEE operations in the same order and are
// expected to agree bit for bit with the scalar reference.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dicke::kernels {

enum class KernelKind { Scalar, Avx2, Neon };

std::string_view kernel_name(KernelKind kind);

/// True when the variant was compiled in and the running CPU supports it.
bool kernel_available(KernelKind kind);

/// Every variant usable on this machine, scalar first.
std::vector<KernelKind> available_kernels();

/// Best available variant. DICKE_KERNEL=scalar|avx2|neon overrides the choice
/// when the requested variant is available.
KernelKind select_kernel();

struct MathieuLanes {
  std::span<const double> stiffness;  // eps^2 per lane
  std::span<const double> drive;      // coefficient of cos(Omega t) per lane
  std::span<double> q;                // in: q(0), out: q(T)
  std::span<double> p;                // in: q'(0), out: q'(T)
};

/// Cosine samples at t_n and t_n + h/2 for n = 0..steps, interleaved.
std::vector<double> cosine_table(double Omega, int steps);

/// Integrates every lane from t = 0 to T = 2 pi / Omega in `steps` RK4 steps.
void integrate_period(KernelKind kind, double Omega, int steps, const MathieuLanes& lanes);

}  // namespace dicke::kernels
