#include "mathieu_variants.hpp"

namespace dicke::kernels::detail {

// Reference RK4 step. The SIMD variants mirror this expression order exactly.
static inline void rk4_step(double c0, double ch, double c1, double h, double a, double b, double& q,
                            double& p) {
  const double half = 0.5 * h;
  const double w0 = a + b * c0;
  const double wh = a + b * ch;
  const double w1 = a + b * c1;

  const double k1q = p;
  const double k1p = -(w0 * q);
  const double q2 = q + half * k1q;
  const double p2 = p + half * k1p;
  const double k2q = p2;
  const double k2p = -(wh * q2);
  const double q3 = q + half * k2q;
  const double p3 = p + half * k2p;
  const double k3q = p3;
  const double k3p = -(wh * q3);
  const double q4 = q + h * k3q;
  const double p4 = p + h * k3p;
  const double k4q = p4;
  const double k4p = -(w1 * q4);

  const double sixth = h / 6.0;
  q = q + sixth * (((k1q + 2.0 * k2q) + 2.0 * k3q) + k4q);
  p = p + sixth * (((k1p + 2.0 * k2p) + 2.0 * k3p) + k4p);
}

void integrate_scalar(const double* cos_table, double h, int steps, std::size_t lanes,
                      const double* stiffness, const double* drive, double* q, double* p) {
  for (std::size_t l = 0; l < lanes; ++l) {
    double ql = q[l];
    double pl = p[l];
    const double a = stiffness[l];
    const double b = drive[l];
    for (int n = 0; n < steps; ++n) {
      const double* c = cos_table + 2 * n;
      rk4_step(c[0], c[1], c[2], h, a, b, ql, pl);
    }
    q[l] = ql;
    p[l] = pl;
  }
}

}  // namespace dicke::kernels::detail
