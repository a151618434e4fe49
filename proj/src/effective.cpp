#include "dicke/effective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace dicke::effective {

using Eigen::MatrixXd;

void QuantumBasis::validate() const {
  if (n_atoms < 1) throw InvalidArgument("basis: n_atoms must be >= 1");
  if (n_max < 1) throw InvalidArgument("basis: n_max must be >= 1");
}

double OperatorMatrix::hermiticity_defect() const {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void OperatorMatrix::mark_hermitian(double tol) {
  const double defect = hermiticity_defect();
  if (!(defect < tol)) {
    std::ostringstream msg;
    msg << "operator is not Hermitian: ||H - H^dag||_max = " << defect;
    throw NumericalError(msg.str());
  }
  hermitian = true;
}

MatrixXd fock_annihilation(std::size_t fock_dim) {
  const auto n = static_cast<Eigen::Index>(fock_dim);
  MatrixXd a = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) a(i - 1, i) = std::sqrt(static_cast<double>(i));
  return a;
}

MatrixXd fock_number(std::size_t fock_dim) {
  const auto n = static_cast<Eigen::Index>(fock_dim);
  return Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)).asDiagonal();
}

MatrixXd compressed_quadrature_squared(std::size_t fock_dim) {
  const MatrixXd a = fock_annihilation(fock_dim + 1);
  const MatrixXd x = a + a.transpose();
  const auto n = static_cast<Eigen::Index>(fock_dim);
  return (x * x).topLeftCorner(n, n);
}

MatrixXd spin_jz(int n_atoms) {
  const double j = 0.5 * n_atoms;
  return Eigen::VectorXd::LinSpaced(n_atoms + 1, -j, j).asDiagonal();
}

MatrixXd spin_jplus(int n_atoms) {
  const double j = 0.5 * n_atoms;
  MatrixXd jp = MatrixXd::Zero(n_atoms + 1, n_atoms + 1);
  for (int i = 0; i < n_atoms; ++i) {
    const double m = -j + i;
    jp(i + 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  return jp;
}

MatrixXd tensor(const MatrixXd& fock, const MatrixXd& spin) {
  return Eigen::kroneckerProduct(fock, spin).eval();
}

namespace {

OperatorMatrix wrap(const MatrixXd& m, bool hermitian) {
  return {m.cast<std::complex<double>>(), hermitian};
}

// P J0(scale X) P with X the quadrature on fock_dim + padding levels.
MatrixXd bessel_block(std::size_t fock_dim, double scale, int padding) {
  const auto n = static_cast<Eigen::Index>(fock_dim);
  if (scale == 0.0) return MatrixXd::Identity(n, n);
  if (padding < 0) throw InvalidArgument("fock_padding must be >= 0");
  const std::size_t big = fock_dim + static_cast<std::size_t>(padding);
  const MatrixXd a = fock_annihilation(big);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a + a.transpose());
  if (es.info() != Eigen::Success) throw EigensolverFailure("quadrature eigendecomposition failed");
  Eigen::VectorXd f = es.eigenvalues();
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = ::j0(scale * f[i]);
  const MatrixXd top = es.eigenvectors().topRows(n);
  return top * f.asDiagonal() * top.transpose();
}

}  // namespace

Operators build_operators(const QuantumBasis& basis) {
  basis.validate();
  const std::size_t F = basis.fock_dim();
  const auto S = static_cast<Eigen::Index>(basis.spin_dim());
  const MatrixXd idF = MatrixXd::Identity(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(F));
  const MatrixXd idS = MatrixXd::Identity(S, S);
  const MatrixXd a = fock_annihilation(F);
  const MatrixXd jp = spin_jplus(basis.n_atoms);
  const MatrixXd jm = jp.transpose();
  Operators ops;
  ops.a = wrap(tensor(a, idS), false);
  ops.adag = wrap(tensor(a.transpose(), idS), false);
  ops.jz = wrap(tensor(idF, spin_jz(basis.n_atoms)), true);
  ops.jp = wrap(tensor(idF, jp), false);
  ops.jm = wrap(tensor(idF, jm), false);
  ops.jx = wrap(tensor(idF, 0.5 * (jp + jm)), true);
  ops.quadrature = wrap(tensor(a + a.transpose(), idS), true);
  return ops;
}

OperatorMatrix parity_operator(const QuantumBasis& basis) {
  basis.validate();
  const std::size_t S = basis.spin_dim();
  Eigen::VectorXd d(static_cast<Eigen::Index>(basis.dim()));
  for (int n = 0; n <= basis.n_max; ++n)
    for (std::size_t mi = 0; mi < S; ++mi)
      d[static_cast<Eigen::Index>(basis.index(n, static_cast<int>(mi)))] =
          ((n + static_cast<int>(mi)) % 2 == 0) ? 1.0 : -1.0;
  return wrap(d.asDiagonal().toDenseMatrix(), true);
}

OperatorMatrix bessel_of_quadrature(const QuantumBasis& basis, double scale, int fock_padding) {
  basis.validate();
  const auto S = static_cast<Eigen::Index>(basis.spin_dim());
  return wrap(tensor(bessel_block(basis.fock_dim(), scale, fock_padding), MatrixXd::Identity(S, S)),
              true);
}

OperatorMatrix build_h0(int k, const ModelParams& params, const QuantumBasis& basis,
                        Variant variant, int fock_padding) {
  if (k < 0 || k > 2) throw UnsupportedVariant("effective Hamiltonian only for k = 0, 1, 2");
  if (k > 0 && variant == Variant::Full)
    throw UnsupportedVariant("variant 'full' has a closed form only for k = 0");
  params.validate();
  basis.validate();

  const std::size_t F = basis.fock_dim();
  const auto Fi = static_cast<Eigen::Index>(F);
  const auto S = static_cast<Eigen::Index>(basis.spin_dim());
  const MatrixXd idF = MatrixXd::Identity(Fi, Fi);
  const MatrixXd idS = MatrixXd::Identity(S, S);
  const MatrixXd a = fock_annihilation(F);
  const MatrixXd ad = a.transpose();
  const MatrixXd num = fock_number(F);
  const MatrixXd jz = spin_jz(basis.n_atoms);
  const MatrixXd jp = spin_jplus(basis.n_atoms);
  const MatrixXd jm = jp.transpose();

  const double N = basis.n_atoms;
  const double sqrtN = std::sqrt(N);
  const double r2 = params.drive_ratio() * params.drive_ratio();
  const double w = params.omega;
  const double w0 = params.omega0;
  const double g = params.g;
  const Detunings det = detunings(params, k);

  MatrixXd h;
  if (k == 0) {
    const MatrixXd jx = 0.5 * (jp + jm);
    h = det.delta_k * tensor(num, idS) + (g / sqrtN) * tensor(a + ad, jp + jm) +
        (2.0 * w * r2 / N) * tensor(idF, jx * jx);
    if (variant == Variant::Full) {
      const double scale = 2.0 * params.drive_ratio() / sqrtN;
      h += det.delta0_k * tensor(bessel_block(F, scale, fock_padding), jz);
    } else {
      h += det.delta0_k * tensor(idF, jz) - (w0 * r2 / N) * tensor(compressed_quadrature_squared(F), jz);
    }
  } else {
    h = det.delta_k * tensor(num, idS) + det.delta0_k * tensor(idF, jz) +
        (g / sqrtN) * (tensor(ad, jm) + tensor(a, jp)) -
        (2.0 * w0 * r2 / N) * tensor(num, jz) + (w * r2 / N) * tensor(idF, jm * jp);
    if (k == 1) {
      h += (params.dg / (2.0 * sqrtN)) * (tensor(ad, jp) + tensor(a, jm));
    } else {
      h += (w0 * r2 / (2.0 * N)) * tensor(ad * ad + a * a, jz) -
           (w * r2 / (4.0 * N)) * tensor(idF, jp * jp + jm * jm);
    }
  }
  OperatorMatrix out = wrap(h, false);
  out.mark_hermitian();
  return out;
}

namespace {

void fill_order_parameters(SpectrumResult& r, const QuantumBasis& basis) {
  const std::size_t S = basis.spin_dim();
  const double j = basis.j();
  double n_exp = 0.0;
  double jz_exp = 0.0;
  for (int n = 0; n <= basis.n_max; ++n) {
    for (std::size_t mi = 0; mi < S; ++mi) {
      const double p = std::norm(r.ground_state[static_cast<Eigen::Index>(
          basis.index(n, static_cast<int>(mi)))]);
      n_exp += p * n;
      jz_exp += p * (-j + static_cast<double>(mi));
    }
  }
  r.order_field = 2.0 * n_exp / basis.n_atoms;
  r.order_atom = std::clamp(2.0 * jz_exp / basis.n_atoms + 1.0, 0.0, 2.0);
}

// Fixes the global phase: largest component real and positive.
void normalise_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const auto z = v[imax];
  if (std::abs(z) > 0.0) v *= std::conj(z) / std::abs(z);
  v.normalize();
}

}  // namespace

SpectrumResult spectrum(const OperatorMatrix& H, std::size_t n_eigs, const QuantumBasis& basis,
                        const SpectrumOptions& options) {
  basis.validate();
  if (!H.hermitian) throw InvalidArgument("spectrum: operator is not flagged Hermitian");
  const auto dim = static_cast<std::size_t>(H.dim());
  if (dim != basis.dim()) throw InvalidArgument("spectrum: operator does not match basis");
  if (n_eigs == 0 || n_eigs > dim) throw InvalidArgument("spectrum: need 1 <= n_eigs <= dim");

  SpectrumResult r;
  if (dim <= options.dense_limit) {
    const bool real = H.m.imag().cwiseAbs().maxCoeff() == 0.0;
    if (real) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(H.m.real());
      if (es.info() != Eigen::Success) throw EigensolverFailure("dense eigensolver failed");
      r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n_eigs);
      r.ground_state = es.eigenvectors().col(0).cast<std::complex<double>>();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.m);
      if (es.info() != Eigen::Success) throw EigensolverFailure("dense eigensolver failed");
      r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n_eigs);
      r.ground_state = es.eigenvectors().col(0);
    }
  } else {
    auto pairs = lanczos_lowest(H.m, n_eigs, options.lanczos_tol, options.lanczos_max_restarts);
    r.eigenvalues = std::move(pairs.values);
    r.ground_state = pairs.vectors.col(0);
  }
  normalise_phase(r.ground_state);
  fill_order_parameters(r, basis);
  return r;
}

int default_fock_cutoff(const ModelParams& params, int n_atoms) {
  const double s = params.g + params.dg;
  const double est = 10.0 * n_atoms * s * s / (params.omega * params.omega);
  return std::max(40, static_cast<int>(std::ceil(est)));
}

EffectiveSolution solve_effective(int k, const ModelParams& params, const QuantumBasis& basis,
                                  Variant variant, std::size_t n_eigs,
                                  const SpectrumOptions& options) {
  EffectiveSolution sol;
  sol.basis = basis;
  sol.spectrum = spectrum(build_h0(k, params, basis, variant), n_eigs, basis, options);
  const QuantumBasis wider = basis.with_cutoff(basis.n_max + 8);
  const auto check = spectrum(build_h0(k, params, wider, variant), n_eigs, wider, options);
  for (std::size_t i = 0; i < n_eigs; ++i)
    sol.cutoff_defect = std::max(sol.cutoff_defect,
                                 std::abs(check.eigenvalues[i] - sol.spectrum.eigenvalues[i]));
  return sol;
}

std::vector<double> critical_branches(int k, const ModelParams& params) {
  if (k < 0 || k > 2) throw InvalidArgument("critical_line: k must be 0, 1 or 2");
  const double r2 = params.drive_ratio() * params.drive_ratio();
  const double w = params.omega;
  const double w0 = params.omega0;
  std::vector<double> raw;
  if (k == 0) {
    raw.push_back(0.5 * std::sqrt((w + 2.0 * w0 * r2) * (w0 + 2.0 * w * r2)));
  } else if (k == 1) {
    const double d1 = detunings(params, 1).delta_k;
    raw.push_back(-0.5 * params.dg + std::abs(d1 + w * r2));
  } else {
    const double d2 = detunings(params, 2).delta_k;
    raw.push_back(d2 + 0.5 * w * r2);
    raw.push_back(-d2 - 1.5 * w * r2);
  }
  return raw;
}

std::vector<double> critical_line(int k, const ModelParams& params) {
  std::vector<double> out;
  for (double g : critical_branches(k, params))
    if (g >= 0.0) out.push_back(g);
  return out;
}

RwaValidity rwa_validity(const ModelParams& params, int k) {
  params.validate();
  const Detunings det = detunings(params, k);
  RwaValidity v;
  v.k = k;
  v.scale = params.Omega * std::max(1.0, params.drive_ratio());
  v.g_over_scale = params.g / v.scale;
  v.omega_over_scale = params.omega / v.scale;
  v.omega0_over_scale = params.omega0 / v.scale;
  v.dg_over_omega = params.dg / params.omega;
  v.delta_over_omega = std::abs(det.delta_k) / params.omega;
  v.delta0_over_omega0 = std::abs(det.delta0_k) / params.omega0;
  v.drive_sq = params.drive_ratio() * params.drive_ratio();
  return v;
}

double steepest_rise(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw InvalidArgument("steepest_rise: need >= 3 matching samples");
  const std::size_t n = x.size() - 1;
  std::vector<double> slope(n), mid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = x[i + 1] - x[i];
    if (!(h > 0.0)) throw InvalidArgument("steepest_rise: x must be strictly ascending");
    slope[i] = (y[i + 1] - y[i]) / h;
    mid[i] = 0.5 * (x[i] + x[i + 1]);
  }
  const auto best = static_cast<std::size_t>(std::max_element(slope.begin(), slope.end()) - slope.begin());
  if (best == 0 || best + 1 == n) return mid[best];
  const double a = slope[best - 1], b = slope[best], c = slope[best + 1];
  const double curv = a - 2.0 * b + c;
  if (!(curv < 0.0)) return mid[best];
  // Vertex of the parabola through the three slopes (mid spacing taken locally).
  const double h = 0.5 * (mid[best + 1] - mid[best - 1]);
  return mid[best] + 0.5 * (a - c) / curv * h;
}

}  // namespace dicke::effective
