#pragma once

// Per-ISA entry points behind integrate_period. Each takes the interleaved
// cosine table from cosine_table(), the step size, and `lanes` oscillators.

#include <cstddef>

namespace dicke::kernels::detail {

void integrate_scalar(const double* cos_table, double h, int steps, std::size_t lanes,
                      const double* stiffness, const double* drive, double* q, double* p);

#if defined(DICKE_HAVE_AVX2)
void integrate_avx2(const double* cos_table, double h, int steps, std::size_t lanes,
                    const double* stiffness, const double* drive, double* q, double* p);
#endif

#if defined(DICKE_HAVE_NEON)
void integrate_neon(const double* cos_table, double h, int steps, std::size_t lanes,
                    const double* stiffness, const double* drive, double* q, double* p);
#endif

}  // namespace dicke::kernels::detail
