#include "dicke/kernels/mathieu_batch.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "dicke/core.hpp"
#include "mathieu_variants.hpp"

namespace dicke::kernels {

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Scalar:
      return "scalar";
    case KernelKind::Avx2:
      return "avx2";
    case KernelKind::Neon:
      return "neon";
  }
  return "unknown";
}

bool kernel_available(KernelKind kind) {
  switch (kind) {
    case KernelKind::Scalar:
      return true;
    case KernelKind::Avx2:
#if defined(DICKE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case KernelKind::Neon:
#if defined(DICKE_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

std::vector<KernelKind> available_kernels() {
  std::vector<KernelKind> out;
  for (auto k : {KernelKind::Scalar, KernelKind::Avx2, KernelKind::Neon})
    if (kernel_available(k)) out.push_back(k);
  return out;
}

KernelKind select_kernel() {
  if (const char* env = std::getenv("DICKE_KERNEL")) {
    const std::string want(env);
    for (auto k : available_kernels())
      if (kernel_name(k) == want) return k;
  }
  if (kernel_available(KernelKind::Avx2)) return KernelKind::Avx2;
  if (kernel_available(KernelKind::Neon)) return KernelKind::Neon;
  return KernelKind::Scalar;
}

std::vector<double> cosine_table(double Omega, int steps) {
  (void)Omega;  // Omega t_n = 2 pi n / steps independent of Omega
  std::vector<double> table(2 * static_cast<std::size_t>(steps) + 1);
  for (std::size_t i = 0; i < table.size(); ++i)
    table[i] = std::cos(kPi * static_cast<double>(i) / static_cast<double>(steps));
  return table;
}

void integrate_period(KernelKind kind, double Omega, int steps, const MathieuLanes& lanes) {
  const std::size_t n = lanes.stiffness.size();
  if (lanes.drive.size() != n || lanes.q.size() != n || lanes.p.size() != n)
    throw InvalidArgument("integrate_period: lane spans differ in length");
  if (steps < 1) throw InvalidArgument("integrate_period: steps must be positive");
  if (!kernel_available(kind)) throw InvalidArgument("integrate_period: kernel not available");

  const auto table = cosine_table(Omega, steps);
  const double h = (kTwoPi / Omega) / static_cast<double>(steps);
  switch (kind) {
    case KernelKind::Scalar:
      detail::integrate_scalar(table.data(), h, steps, n, lanes.stiffness.data(),
                               lanes.drive.data(), lanes.q.data(), lanes.p.data());
      return;
    case KernelKind::Avx2:
#if defined(DICKE_HAVE_AVX2)
      detail::integrate_avx2(table.data(), h, steps, n, lanes.stiffness.data(), lanes.drive.data(),
                             lanes.q.data(), lanes.p.data());
#endif
      return;
    case KernelKind::Neon:
#if defined(DICKE_HAVE_NEON)
      detail::integrate_neon(table.data(), h, steps, n, lanes.stiffness.data(), lanes.drive.data(),
                             lanes.q.data(), lanes.p.data());
#endif
      return;
  }
}

}  // namespace dicke::kernels
