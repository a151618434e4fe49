#include "mathieu_variants.hpp"

#include <immintrin.h>

namespace dicke::kernels::detail {

namespace {

struct Lane4 {
  __m256d q;
  __m256d p;
};

inline void rk4_step(__m256d c0, __m256d ch, __m256d c1, __m256d h, __m256d half, __m256d sixth,
                     __m256d two, __m256d a, __m256d b, Lane4& s) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d w0 = _mm256_add_pd(a, _mm256_mul_pd(b, c0));
  const __m256d wh = _mm256_add_pd(a, _mm256_mul_pd(b, ch));
  const __m256d w1 = _mm256_add_pd(a, _mm256_mul_pd(b, c1));

  const __m256d k1q = s.p;
  const __m256d k1p = _mm256_sub_pd(zero, _mm256_mul_pd(w0, s.q));
  const __m256d q2 = _mm256_add_pd(s.q, _mm256_mul_pd(half, k1q));
  const __m256d p2 = _mm256_add_pd(s.p, _mm256_mul_pd(half, k1p));
  const __m256d k2q = p2;
  const __m256d k2p = _mm256_sub_pd(zero, _mm256_mul_pd(wh, q2));
  const __m256d q3 = _mm256_add_pd(s.q, _mm256_mul_pd(half, k2q));
  const __m256d p3 = _mm256_add_pd(s.p, _mm256_mul_pd(half, k2p));
  const __m256d k3q = p3;
  const __m256d k3p = _mm256_sub_pd(zero, _mm256_mul_pd(wh, q3));
  const __m256d q4 = _mm256_add_pd(s.q, _mm256_mul_pd(h, k3q));
  const __m256d p4 = _mm256_add_pd(s.p, _mm256_mul_pd(h, k3p));
  const __m256d k4q = p4;
  const __m256d k4p = _mm256_sub_pd(zero, _mm256_mul_pd(w1, q4));

  const __m256d sq = _mm256_add_pd(
      _mm256_add_pd(_mm256_add_pd(k1q, _mm256_mul_pd(two, k2q)), _mm256_mul_pd(two, k3q)), k4q);
  const __m256d sp = _mm256_add_pd(
      _mm256_add_pd(_mm256_add_pd(k1p, _mm256_mul_pd(two, k2p)), _mm256_mul_pd(two, k3p)), k4p);
  s.q = _mm256_add_pd(s.q, _mm256_mul_pd(sixth, sq));
  s.p = _mm256_add_pd(s.p, _mm256_mul_pd(sixth, sp));
}

}  // namespace

void integrate_avx2(const double* cos_table, double h, int steps, std::size_t lanes,
                    const double* stiffness, const double* drive, double* q, double* p) {
  const __m256d hv = _mm256_set1_pd(h);
  const __m256d half = _mm256_set1_pd(0.5 * h);
  const __m256d sixth = _mm256_set1_pd(h / 6.0);
  const __m256d two = _mm256_set1_pd(2.0);

  std::size_t l = 0;
  for (; l + 4 <= lanes; l += 4) {
    const __m256d a = _mm256_loadu_pd(stiffness + l);
    const __m256d b = _mm256_loadu_pd(drive + l);
    Lane4 s{_mm256_loadu_pd(q + l), _mm256_loadu_pd(p + l)};
    for (int n = 0; n < steps; ++n) {
      const double* c = cos_table + 2 * n;
      rk4_step(_mm256_set1_pd(c[0]), _mm256_set1_pd(c[1]), _mm256_set1_pd(c[2]), hv, half, sixth,
               two, a, b, s);
    }
    _mm256_storeu_pd(q + l, s.q);
    _mm256_storeu_pd(p + l, s.p);
  }
  if (l < lanes)
    integrate_scalar(cos_table, h, steps, lanes - l, stiffness + l, drive + l, q + l, p + l);
}

}  // namespace dicke::kernels::detail
