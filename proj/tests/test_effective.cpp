#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "dicke/effective.hpp"
#include "doctest.h"

using namespace dicke;
using namespace dicke::effective;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

ModelParams resonant(double omega, double g, double dg, double Omega = 1.0) {
  return {omega, omega, g, dg, Omega};
}

// Mean-field order parameters of the undriven model at resonance above g_c.
double mean_field_order_field(double omega, double g) {
  const double gc = 0.5 * omega;
  const double mu = (gc / g) * (gc / g);
  return 2.0 * g * g * (1.0 - mu * mu) / (omega * omega);
}

}  // namespace

TEST_CASE("basis ordering and dimension") {
  QuantumBasis b{4, 10};
  CHECK(b.dim() == 55);
  CHECK(b.index(0, 0) == 0);
  CHECK(b.index(1, 0) == 5);
  CHECK(b.index(2, 3) == 13);
  CHECK_THROWS_AS((QuantumBasis{0, 10}.validate()), InvalidArgument);
  CHECK_THROWS_AS((QuantumBasis{2, 0}.validate()), InvalidArgument);
}

TEST_CASE("operator algebra") {
  const QuantumBasis b{5, 12};
  const auto ops = build_operators(b);
  const Eigen::MatrixXcd comm_j = ops.jp.m * ops.jm.m - ops.jm.m * ops.jp.m;
  CHECK(max_abs(comm_j - 2.0 * ops.jz.m) < 1e-12);

  const Eigen::MatrixXcd comm_a = ops.a.m * ops.adag.m - ops.adag.m * ops.a.m;
  for (int n = 0; n <= b.n_max; ++n) {
    for (int mi = 0; mi <= b.n_atoms; ++mi) {
      const auto i = static_cast<Eigen::Index>(b.index(n, mi));
      const double expect = n < b.n_max ? 1.0 : -static_cast<double>(b.n_max);
      CHECK(comm_a(i, i).real() == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  for (int mi = 0; mi <= b.n_atoms; ++mi)
    CHECK(ops.jz.m(mi, mi).real() == doctest::Approx(-2.5 + mi));
  CHECK(max_abs(ops.jx.m - 0.5 * (ops.jp.m + ops.jm.m)) == 0.0);
  CHECK(max_abs(ops.quadrature.m - (ops.a.m + ops.adag.m)) == 0.0);
}

TEST_CASE("bessel of quadrature") {
  const QuantumBasis b{2, 20};
  const auto id = bessel_of_quadrature(b, 0.0);
  CHECK(max_abs(id.m - Eigen::MatrixXcd::Identity(b.dim(), b.dim())) == 0.0);

  for (double scale : {0.1, 0.7, 2.5}) {
    for (int pad : {0, 32}) {
      const auto j0 = bessel_of_quadrature(b, scale, pad);
      CHECK(j0.hermitian);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(j0.m);
      CHECK(es.eigenvalues().minCoeff() >= -0.4028);
      CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
    }
  }

  // Low-n block stable under n_max -> n_max + 8 when scale sqrt(n_max) <~ 1.
  const QuantumBasis small{1, 16};
  const double scale = 0.25;
  for (int pad : {0, 32}) {
    const auto m1 = bessel_of_quadrature(small, scale, pad);
    const auto m2 = bessel_of_quadrature(small.with_cutoff(24), scale, pad);
    const Eigen::Index blk = 2 * 8;
    CHECK(max_abs(m1.m.topLeftCorner(blk, blk) - m2.m.topLeftCorner(blk, blk)) < 1e-8);
  }

  // Padded compression is close to the untruncated operator on the low block:
  // <0|J0(sX)|0> = exp(-s^2/4) I0(s^2/4) for the vacuum.
  const double s = 1.3;
  const auto j0 = bessel_of_quadrature(QuantumBasis{1, 20}, s, 32);
  const double vac = std::exp(-s * s / 4.0) * std::cyl_bessel_i(0.0, s * s / 4.0);
  CHECK(j0.m(0, 0).real() == doctest::Approx(vac).epsilon(1e-10));
}

TEST_CASE("undriven limit of every variant") {
  const QuantumBasis b{4, 15};
  const ModelParams p{0.7, 0.9, 0.3, 0.0, 1.0};
  const auto ops = build_operators(b);
  const Eigen::MatrixXcd dicke = p.omega * ops.adag.m * ops.a.m + p.omega0 * ops.jz.m +
                                 (p.g / 2.0) * ops.quadrature.m * (ops.jp.m + ops.jm.m);
  CHECK(max_abs(build_h0(0, p, b, Variant::Full).m - dicke) < 1e-14);
  CHECK(max_abs(build_h0(0, p, b, Variant::SecondOrder).m - dicke) < 1e-14);
}

TEST_CASE("decoupled ground state") {
  const QuantumBasis b{6, 10};
  const ModelParams p{0.7, 0.9, 0.0, 0.0, 1.0};
  const auto r = spectrum(build_h0(0, p, b, Variant::Full), 3, b);
  CHECK(r.eigenvalues[0] == doctest::Approx(-0.9 * 3.0).epsilon(1e-12));
  CHECK(std::abs(r.ground_state[0]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.order_field == doctest::Approx(0.0));
  CHECK(r.order_atom == doctest::Approx(0.0));
}

TEST_CASE("k=1 on resonance with no coupling vanishes") {
  const QuantumBasis b{3, 8};
  const ModelParams p{0.5, 0.5, 0.0, 0.0, 1.0};
  CHECK(max_abs(build_h0(1, p, b, Variant::SecondOrder).m) == 0.0);
}

TEST_CASE("unsupported variants") {
  const QuantumBasis b{2, 4};
  const ModelParams p = resonant(0.5, 0.1, 0.1);
  CHECK_THROWS_AS(build_h0(1, p, b, Variant::Full), UnsupportedVariant);
  CHECK_THROWS_AS(build_h0(2, p, b, Variant::Full), UnsupportedVariant);
  CHECK_THROWS_AS(build_h0(3, p, b, Variant::SecondOrder), UnsupportedVariant);
  CHECK_THROWS_AS(build_h0(-1, p, b, Variant::SecondOrder), UnsupportedVariant);
}

TEST_CASE("hermiticity and parity") {
  const QuantumBasis b{4, 14};
  const auto parity = parity_operator(b);
  const ModelParams p{0.45, 0.55, 0.12, 0.3, 1.0};
  for (int k = 0; k <= 2; ++k) {
    for (auto v : {Variant::Full, Variant::SecondOrder}) {
      if (k > 0 && v == Variant::Full) continue;
      const auto h = build_h0(k, p, b, v);
      CHECK(h.hermitian);
      CHECK(h.hermiticity_defect() < 1e-12);
      CHECK(max_abs(h.m * parity.m - parity.m * h.m) < 1e-10);
    }
  }
}

TEST_CASE("full and second-order k=0 differ at fourth order") {
  const QuantumBasis b{4, 20};
  std::vector<double> diffs;
  for (double r : {0.05, 0.1, 0.2}) {
    const ModelParams p = resonant(0.3, 0.1, r);
    const auto full = spectrum(build_h0(0, p, b, Variant::Full), 4, b);
    const auto second = spectrum(build_h0(0, p, b, Variant::SecondOrder), 4, b);
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(full.eigenvalues[i] - second.eigenvalues[i]));
    diffs.push_back(d);
  }
  for (int i = 0; i < 2; ++i) {
    const double ratio = diffs[i + 1] / diffs[i];
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
  }
}

TEST_CASE("normal-phase precursor") {
  const QuantumBasis b{8, 40};
  const auto r = spectrum(build_h0(0, resonant(1.0, 0.1, 0.0), b, Variant::Full), 2, b);
  CHECK(r.order_field < 0.05);
  CHECK(std::abs(r.ground_state.norm() - 1.0) < 1e-12);
}

TEST_CASE("superradiant order parameter approaches mean field with N") {
  const ModelParams p = resonant(1.0, 1.0, 0.0);
  const double mf = mean_field_order_field(1.0, 1.0);
  CHECK(mf == doctest::Approx(1.875));
  double err[2];
  int slot = 0;
  for (int n : {8, 16}) {
    const auto sol = solve_effective(0, p, QuantumBasis{n, 64}, Variant::Full, 3);
    CHECK(sol.cutoff_defect < 1e-9);
    CHECK(sol.spectrum.order_field >= 0.0);
    CHECK(sol.spectrum.order_atom >= 0.0);
    CHECK(sol.spectrum.order_atom <= 2.0);
    err[slot++] = std::abs(sol.spectrum.order_field - mf);
  }
  CHECK(err[1] < err[0]);
}

TEST_CASE("lanczos agrees with the dense solver") {
  const QuantumBasis b{4, 20};
  const auto h = build_h0(1, ModelParams{0.52, 0.47, 0.04, 0.08, 1.0}, b, Variant::SecondOrder);
  const auto dense = spectrum(h, 4, b);
  SpectrumOptions opt;
  opt.dense_limit = 10;
  const auto iter = spectrum(h, 4, b, opt);
  for (int i = 0; i < 4; ++i) CHECK(iter.eigenvalues[i] == doctest::Approx(dense.eigenvalues[i]).epsilon(1e-9));
  CHECK(iter.order_field == doctest::Approx(dense.order_field).epsilon(1e-6));
}

TEST_CASE("spectrum preconditions") {
  const QuantumBasis b{2, 4};
  OperatorMatrix h{Eigen::MatrixXcd::Identity(15, 15), false};
  CHECK_THROWS_AS(spectrum(h, 1, b), InvalidArgument);
  h.hermitian = true;
  CHECK_THROWS_AS(spectrum(h, 0, b), InvalidArgument);
  CHECK_THROWS_AS(spectrum(h, 16, b), InvalidArgument);
  CHECK_THROWS_AS(spectrum(h, 1, QuantumBasis{3, 4}), InvalidArgument);
}

TEST_CASE("critical lines") {
  CHECK(critical_line(0, resonant(0.3, 0.0, 0.0))[0] == doctest::Approx(0.15));
  CHECK(critical_line(0, resonant(0.05, 0.0, 0.3))[0] == doctest::Approx(0.0295).epsilon(1e-14));
  // Off resonance the k=0 line is the origin Hessian zero crossing.
  const ModelParams off{0.4, 0.9, 0.0, 0.0, 1.0};
  CHECK(critical_line(0, off)[0] == doctest::Approx(0.5 * std::sqrt(0.4 * 0.9)));
  const auto k1 = critical_line(1, resonant(0.5, 0.0, 0.0));
  REQUIRE(k1.size() == 1);
  CHECK(k1[0] == 0.0);
  // k=1: -dg/2 + |delta + omega r^2| with delta = 0.1, r = 0.1.
  const auto k1b = critical_line(1, ModelParams{0.6, 0.5, 0.0, 0.1, 1.0});
  REQUIRE(k1b.size() == 1);
  CHECK(k1b[0] == doctest::Approx(-0.05 + 0.1 + 0.6 * 0.01).epsilon(1e-14));
  CHECK(critical_line(1, ModelParams{0.5, 0.5, 0.0, 0.3, 1.0}).empty());
  // k=2 with delta = 0.03, r = 0.1: one positive branch.
  const auto k2 = critical_line(2, ModelParams{1.03, 1.0, 0.0, 0.1, 1.0});
  REQUIRE(k2.size() == 1);
  CHECK(k2[0] == doctest::Approx(0.03 + 0.5 * 1.03 * 0.01));
  const auto k2b = critical_line(2, ModelParams{0.9, 1.0, 0.0, 0.1, 1.0});
  REQUIRE(k2b.size() == 1);
  CHECK(k2b[0] == doctest::Approx(0.1 - 1.5 * 0.9 * 0.01));
  CHECK_THROWS_AS(critical_line(3, resonant(0.5, 0.0, 0.0)), InvalidArgument);
}

TEST_CASE("cutoff policy and validity report") {
  CHECK(default_fock_cutoff(resonant(1.0, 0.1, 0.0), 8) == 40);
  CHECK(default_fock_cutoff(resonant(0.05, 0.05, 0.05), 8) == 320);
  const auto v = rwa_validity(ModelParams{0.05, 0.06, 0.02, 2.0, 1.0}, 0);
  CHECK(v.scale == 2.0);
  CHECK(v.g_over_scale == doctest::Approx(0.01));
  CHECK(v.dg_over_omega == doctest::Approx(40.0));
  CHECK(v.drive_sq == doctest::Approx(4.0));
  const auto v1 = rwa_validity(ModelParams{0.52, 0.5, 0.01, 0.1, 1.0}, 1);
  CHECK(v1.delta_over_omega == doctest::Approx(0.02 / 0.52));
  CHECK(v1.delta0_over_omega0 == doctest::Approx(0.0).epsilon(1e-12));
}
