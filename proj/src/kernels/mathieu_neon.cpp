#include "mathieu_variants.hpp"

#include <arm_neon.h>

namespace dicke::kernels::detail {

namespace {

struct Lane2 {
  float64x2_t q;
  float64x2_t p;
};

inline void rk4_step(float64x2_t c0, float64x2_t ch, float64x2_t c1, float64x2_t h,
                     float64x2_t half, float64x2_t sixth, float64x2_t two, float64x2_t a,
                     float64x2_t b, Lane2& s) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t w0 = vaddq_f64(a, vmulq_f64(b, c0));
  const float64x2_t wh = vaddq_f64(a, vmulq_f64(b, ch));
  const float64x2_t w1 = vaddq_f64(a, vmulq_f64(b, c1));

  const float64x2_t k1q = s.p;
  const float64x2_t k1p = vsubq_f64(zero, vmulq_f64(w0, s.q));
  const float64x2_t q2 = vaddq_f64(s.q, vmulq_f64(half, k1q));
  const float64x2_t p2 = vaddq_f64(s.p, vmulq_f64(half, k1p));
  const float64x2_t k2q = p2;
  const float64x2_t k2p = vsubq_f64(zero, vmulq_f64(wh, q2));
  const float64x2_t q3 = vaddq_f64(s.q, vmulq_f64(half, k2q));
  const float64x2_t p3 = vaddq_f64(s.p, vmulq_f64(half, k2p));
  const float64x2_t k3q = p3;
  const float64x2_t k3p = vsubq_f64(zero, vmulq_f64(wh, q3));
  const float64x2_t q4 = vaddq_f64(s.q, vmulq_f64(h, k3q));
  const float64x2_t p4 = vaddq_f64(s.p, vmulq_f64(h, k3p));
  const float64x2_t k4q = p4;
  const float64x2_t k4p = vsubq_f64(zero, vmulq_f64(w1, q4));

  const float64x2_t sq =
      vaddq_f64(vaddq_f64(vaddq_f64(k1q, vmulq_f64(two, k2q)), vmulq_f64(two, k3q)), k4q);
  const float64x2_t sp =
      vaddq_f64(vaddq_f64(vaddq_f64(k1p, vmulq_f64(two, k2p)), vmulq_f64(two, k3p)), k4p);
  s.q = vaddq_f64(s.q, vmulq_f64(sixth, sq));
  s.p = vaddq_f64(s.p, vmulq_f64(sixth, sp));
}

}  // namespace

void integrate_neon(const double* cos_table, double h, int steps, std::size_t lanes,
                    const double* stiffness, const double* drive, double* q, double* p) {
  const float64x2_t hv = vdupq_n_f64(h);
  const float64x2_t half = vdupq_n_f64(0.5 * h);
  const float64x2_t sixth = vdupq_n_f64(h / 6.0);
  const float64x2_t two = vdupq_n_f64(2.0);

  std::size_t l = 0;
  for (; l + 2 <= lanes; l += 2) {
    const float64x2_t a = vld1q_f64(stiffness + l);
    const float64x2_t b = vld1q_f64(drive + l);
    Lane2 s{vld1q_f64(q + l), vld1q_f64(p + l)};
    for (int n = 0; n < steps; ++n) {
      const double* c = cos_table + 2 * n;
      rk4_step(vdupq_n_f64(c[0]), vdupq_n_f64(c[1]), vdupq_n_f64(c[2]), hv, half, sixth, two, a,
               b, s);
    }
    vst1q_f64(q + l, s.q);
    vst1q_f64(p + l, s.p);
  }
  if (l < lanes)
    integrate_scalar(cos_table, h, steps, lanes - l, stiffness + l, drive + l, q + l, p + l);
}

}  // namespace dicke::kernels::detail
