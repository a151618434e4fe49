#include "dicke/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace dicke::floquet {

using effective::OperatorMatrix;
using effective::QuantumBasis;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void DriveConfig::validate() const {
  params.validate();
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be non-negative");
  if (!std::isfinite(phase)) throw InvalidArgument("phase must be finite");
}

double DriveConfig::coupling_at(double t) const {
  return params.g + params.dg * std::cos(params.Omega * t + phase);
}

namespace {

// Real pieces of H(t) = h0 + c(t) h1 + c(t)^2 h2 on the basis.
struct Pieces {
  MatrixXd h0, h1, h2;
};

Pieces lab_pieces(const DriveConfig& cfg, const QuantumBasis& basis) {
  const auto F = basis.fock_dim();
  const auto S = static_cast<Eigen::Index>(basis.spin_dim());
  const MatrixXd idF = MatrixXd::Identity(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(F));
  const MatrixXd idS = MatrixXd::Identity(S, S);
  const MatrixXd a = effective::fock_annihilation(F);
  const MatrixXd jp = effective::spin_jplus(basis.n_atoms);
  const ModelParams& p = cfg.params;
  Pieces out;
  out.h0 = p.omega * effective::tensor(effective::fock_number(F), idS) +
           p.omega0 * effective::tensor(idF, effective::spin_jz(basis.n_atoms));
  out.h1 = effective::tensor(a + a.transpose(), jp + jp.transpose()) /
           std::sqrt(static_cast<double>(basis.n_atoms));
  const double a2 = cfg.include_a2 ? cfg.alpha / p.omega0 : 0.0;
  out.h2 = a2 * effective::tensor(effective::compressed_quadrature_squared(F), idS);
  return out;
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

OperatorMatrix hamiltonian_at(double t, const DriveConfig& cfg, const QuantumBasis& basis) {
  cfg.validate();
  basis.validate();
  const Pieces pc = lab_pieces(cfg, basis);
  const double c = cfg.coupling_at(t);
  OperatorMatrix h{(pc.h0 + c * pc.h1 + c * c * pc.h2).cast<std::complex<double>>(), false};
  h.mark_hermitian();
  return h;
}

double fold_quasienergy(double e, double Omega) {
  return e - Omega * std::ceil((e - 0.5 * Omega) / Omega);
}

FloquetResult propagate_period(const DriveConfig& cfg, const QuantumBasis& basis, int n_slices) {
  cfg.validate();
  basis.validate();
  if (n_slices < kMinSlices) throw InvalidArgument("propagate_period: n_slices must be >= 500");

  const Pieces pc = lab_pieces(cfg, basis);
  const double T = cfg.params.period();
  const double dt = T / n_slices;
  const auto D = static_cast<Eigen::Index>(basis.dim());

  MatrixXd Br = MatrixXd::Identity(D, D);
  MatrixXd Bi = MatrixXd::Zero(D, D);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  MatrixXd Tr(D, D), Ti(D, D);
  auto apply_slice = [&](int i) {
    const double c = cfg.coupling_at((i + 0.5) * dt);
    es.compute(pc.h0 + c * pc.h1 + c * c * pc.h2);
    if (es.info() != Eigen::Success) throw NumericalError("propagate_period: slice eigensolver failed");
    const MatrixXd& V = es.eigenvectors();
    Tr.noalias() = V.transpose() * Br;
    Ti.noalias() = V.transpose() * Bi;
    for (Eigen::Index r = 0; r < D; ++r) {
      const double ph = es.eigenvalues()[r] * dt;
      const double co = std::cos(ph);
      const double si = std::sin(ph);
      // exp(-i ph) (Tr + i Ti)
      const Eigen::RowVectorXd re = co * Tr.row(r) + si * Ti.row(r);
      Ti.row(r) = co * Ti.row(r) - si * Tr.row(r);
      Tr.row(r) = re;
    }
    Br.noalias() = V * Tr;
    Bi.noalias() = V * Ti;
  };

  MatrixXcd U(D, D);
  // For a drive symmetric about T/2 the slice exponentials repeat in reverse
  // order, and each is complex symmetric, so U = B^T B with B the first half.
  const bool symmetric = std::sin(cfg.phase) == 0.0 && n_slices % 2 == 0;
  if (symmetric) {
    for (int i = 0; i < n_slices / 2; ++i) apply_slice(i);
    MatrixXcd B(D, D);
    B.real() = Br;
    B.imag() = Bi;
    U.noalias() = B.transpose() * B;
  } else {
    for (int i = 0; i < n_slices; ++i) apply_slice(i);
    U.real() = Br;
    U.imag() = Bi;
  }

  FloquetResult res;
  res.unitarity_defect = max_abs(U.adjoint() * U - MatrixXcd::Identity(D, D));
  if (!(res.unitarity_defect <= kTolUnitary)) {
    std::ostringstream msg;
    msg << "propagate_period: ||U^dag U - 1||_max = " << res.unitarity_defect
        << " exceeds " << kTolUnitary << " (raise n_slices or n_max)";
    throw UnitarityLoss(msg.str());
  }

  Eigen::ComplexSchur<MatrixXcd> schur(U);
  if (schur.info() != Eigen::Success) throw NumericalError("propagate_period: Schur decomposition failed");
  const MatrixXcd& Tm = schur.matrixT();
  const MatrixXcd& Q = schur.matrixU();
  std::vector<double> eps(static_cast<std::size_t>(D));
  for (Eigen::Index i = 0; i < D; ++i)
    eps[static_cast<std::size_t>(i)] =
        fold_quasienergy(-std::arg(Tm(i, i)) / T, cfg.params.Omega);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(D));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return eps[static_cast<std::size_t>(x)] < eps[static_cast<std::size_t>(y)];
  });
  res.floquet_operator = std::move(U);
  res.floquet_modes.resize(D, D);
  for (Eigen::Index c = 0; c < D; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    res.quasienergies.push_back(eps[static_cast<std::size_t>(src)]);
    res.floquet_modes.col(c) = Q.col(src);
  }
  return res;
}

namespace {

// 0 when the state lives on even n + m_index, 1 on odd.
int parity_bit(const Eigen::VectorXcd& v, const QuantumBasis& basis) {
  double even = 0.0;
  for (int n = 0; n <= basis.n_max; ++n)
    for (int mi = 0; mi <= basis.n_atoms; ++mi)
      if ((n + mi) % 2 == 0)
        even += std::norm(v[static_cast<Eigen::Index>(basis.index(n, mi))]);
  return even >= 0.5 ? 0 : 1;
}

}  // namespace

CrosscheckReport rwa_crosscheck(const DriveConfig& cfg, int k, const QuantumBasis& basis,
                                std::size_t n_low, const CrosscheckOptions& options) {
  cfg.validate();
  basis.validate();
  if (n_low == 0 || n_low > basis.dim()) throw InvalidArgument("rwa_crosscheck: need 1 <= n_low <= dim");
  const auto variant = k == 0 ? effective::Variant::Full : effective::Variant::SecondOrder;
  const OperatorMatrix h = effective::build_h0(k, cfg.params, basis, variant);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h.m);
  if (es.info() != Eigen::Success) throw effective::EigensolverFailure("rwa_crosscheck: eigensolver failed");

  const FloquetResult fr = propagate_period(cfg, basis, options.n_slices);
  const double Omega = cfg.params.Omega;
  const auto D = fr.quasienergies.size();

  // Clusters of near-degenerate quasienergies, closing the zone edge.
  std::vector<std::size_t> cluster(D, 0);
  std::size_t n_clusters = D == 0 ? 0 : 1;
  for (std::size_t j = 1; j < D; ++j) {
    if (fr.quasienergies[j] - fr.quasienergies[j - 1] >= options.cluster_tol * Omega) ++n_clusters;
    cluster[j] = n_clusters - 1;
  }
  if (n_clusters > 1 && fr.quasienergies.front() + Omega - fr.quasienergies.back() < options.cluster_tol * Omega)
    for (auto& c : cluster)
      if (c == n_clusters - 1) c = 0;

  CrosscheckReport rep;
  rep.k = k;
  rep.unitarity_defect = fr.unitarity_defect;
  std::vector<int> parity;
  for (std::size_t i = 0; i < n_low; ++i) {
    const Eigen::VectorXcd psi = es.eigenvectors().col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd overlaps = (fr.floquet_modes.adjoint() * psi).cwiseAbs2();
    std::vector<double> sums(n_clusters, 0.0);
    for (std::size_t j = 0; j < D; ++j) sums[cluster[j]] += overlaps[static_cast<Eigen::Index>(j)];
    const auto best_cluster = static_cast<std::size_t>(
        std::max_element(sums.begin(), sums.end()) - sums.begin());
    std::size_t best = 0;
    double best_overlap = -1.0;
    for (std::size_t j = 0; j < D; ++j) {
      if (cluster[j] == best_cluster && overlaps[static_cast<Eigen::Index>(j)] > best_overlap) {
        best_overlap = overlaps[static_cast<Eigen::Index>(j)];
        best = j;
      }
    }
    rep.h0_eigenvalues.push_back(es.eigenvalues()[static_cast<Eigen::Index>(i)]);
    rep.matched_quasienergies.push_back(fr.quasienergies[best]);
    rep.fidelities.push_back(sums[best_cluster]);
    parity.push_back(parity_bit(psi, basis));
  }
  // Lab quasienergy of an h0 level: E + (k Omega / 2)(n + m) mod Omega.
  for (std::size_t i = 0; i < n_low; ++i) {
    const double dh = rep.h0_eigenvalues[i] - rep.h0_eigenvalues[0] +
                      0.5 * k * Omega * (parity[i] - parity[0]);
    const double df = rep.matched_quasienergies[i] - rep.matched_quasienergies[0];
    rep.quasienergy_errors.push_back(std::abs(fold_quasienergy(df - dh, Omega)));
  }
  rep.mean_fidelity =
      std::accumulate(rep.fidelities.begin(), rep.fidelities.end(), 0.0) / static_cast<double>(n_low);
  rep.min_fidelity = *std::min_element(rep.fidelities.begin(), rep.fidelities.end());
  return rep;
}

OperatorMatrix rotating_frame_average(const DriveConfig& cfg, int k, const QuantumBasis& basis,
                                      const AverageOptions& options) {
  cfg.validate();
  basis.validate();
  if (k < 0 || k > 2) throw InvalidArgument("rotating_frame_average: k must be 0, 1 or 2");
  if (options.n_slices < 2) throw InvalidArgument("rotating_frame_average: n_slices must be >= 2");
  if (options.fock_padding < 1) throw InvalidArgument("rotating_frame_average: fock_padding must be >= 1");

  const ModelParams& p = cfg.params;
  const double sqrtN = std::sqrt(static_cast<double>(basis.n_atoms));
  const double r = p.drive_ratio();
  const auto S = static_cast<Eigen::Index>(basis.spin_dim());
  const std::size_t Fp = basis.fock_dim() + static_cast<std::size_t>(options.fock_padding);
  const auto D = static_cast<Eigen::Index>(basis.dim());
  const auto Dp = static_cast<Eigen::Index>(Fp) * S;

  // Eigenbasis of X (x) J_x on the padded space: W = P (x) Q, eigenvalues x_a s_b.
  const MatrixXd ap = effective::fock_annihilation(Fp);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ex(ap + ap.transpose());
  const MatrixXd jp = effective::spin_jplus(basis.n_atoms);
  const MatrixXd jx = 0.5 * (jp + jp.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(jx);
  const MatrixXd& P = ex.eigenvectors();
  const MatrixXd& Q = es.eigenvectors();
  VectorXd lambda(Dp);
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(Fp); ++a)
    for (Eigen::Index b = 0; b < S; ++b) lambda[a * S + b] = ex.eigenvalues()[a] * es.eigenvalues()[b];
  const MatrixXd Wb = Eigen::kroneckerProduct(P, Q).eval().topRows(D);

  // omega a^dag a + omega0 J_z in the W basis.
  const MatrixXd jz = effective::spin_jz(basis.n_atoms);
  const MatrixXd A = Eigen::kroneckerProduct(
                         (P.transpose() * effective::fock_number(Fp) * P).eval(),
                         MatrixXd::Identity(S, S))
                             .eval() *
                         p.omega +
                     Eigen::kroneckerProduct(MatrixXd::Identity(static_cast<Eigen::Index>(Fp),
                                                                static_cast<Eigen::Index>(Fp)),
                                             (Q.transpose() * jz * Q).eval())
                             .eval() *
                         p.omega0;

  // Terms commuting with X J_x, directly on the basis.
  const auto F = basis.fock_dim();
  const MatrixXd a = effective::fock_annihilation(F);
  const MatrixXd xjx = effective::tensor(a + a.transpose(), jx);
  const MatrixXd h_coupling = 2.0 * xjx / sqrtN;
  const MatrixXd h_a2 = cfg.include_a2 ? MatrixXd(cfg.alpha / p.omega0 *
                                                  effective::tensor(effective::compressed_quadrature_squared(F),
                                                                    MatrixXd::Identity(S, S)))
                                       : MatrixXd::Zero(D, D);

  VectorXd q(D);
  VectorXd excit(D);
  for (int n = 0; n <= basis.n_max; ++n)
    for (int mi = 0; mi <= basis.n_atoms; ++mi) {
      const auto i = static_cast<Eigen::Index>(basis.index(n, mi));
      q[i] = n + mi;
      excit[i] = n + (mi - 0.5 * basis.n_atoms);
    }

  const double Omega = p.Omega;
  const double T = p.period();
  MatrixXd Gr(D, Dp), Gi(D, Dp), Lr(D, Dp), Li(D, Dp), Mr(D, D), Mi(D, D);
  auto sample = [&](double t, MatrixXd& acc_r, MatrixXd& acc_i) {
    const double mu = 2.0 * r * std::sin(Omega * t) / sqrtN;
    const double mu_dot = 2.0 * p.dg * std::cos(Omega * t) / sqrtN;
    for (Eigen::Index u = 0; u < Dp; ++u) {
      const double ph = mu * lambda[u];
      Gr.col(u) = Wb.col(u) * std::cos(ph);
      Gi.col(u) = Wb.col(u) * std::sin(ph);
    }
    // V^dag A V projected: G A G^dag with G = Wb diag(exp(i mu lambda)).
    Lr.noalias() = Gr * A;
    Li.noalias() = Gi * A;
    Mr.noalias() = Lr * Gr.transpose();
    Mr.noalias() += Li * Gi.transpose();
    Mi.noalias() = Li * Gr.transpose();
    Mi.noalias() -= Lr * Gi.transpose();
    const double c = cfg.coupling_at(t);
    Mr += c * h_coupling + (c * c) * h_a2 - mu_dot * xjx;
    if (k == 0) {
      acc_r += Mr;
      acc_i += Mi;
      return;
    }
    // R^dag M R: element (i, j) picks up exp(i theta (q_i - q_j)).
    const double theta = 0.5 * k * Omega * t;
    for (Eigen::Index j = 0; j < D; ++j) {
      for (Eigen::Index i = 0; i < D; ++i) {
        const double ph = theta * (q[i] - q[j]);
        const double co = std::cos(ph);
        const double si = std::sin(ph);
        acc_r(i, j) += co * Mr(i, j) - si * Mi(i, j);
        acc_i(i, j) += co * Mi(i, j) + si * Mr(i, j);
      }
    }
  };

  const int n = options.n_slices;
  MatrixXd sum_r = MatrixXd::Zero(D, D), sum_i = MatrixXd::Zero(D, D);
  for (int s = 0; s < n; ++s) sample(T * s / n, sum_r, sum_i);
  MatrixXd fine_r = sum_r, fine_i = sum_i;
  for (int s = 0; s < n; ++s) sample(T * (2 * s + 1) / (2.0 * n), fine_r, fine_i);

  MatrixXcd coarse(D, D), fine(D, D);
  coarse.real() = sum_r / n;
  coarse.imag() = sum_i / n;
  fine.real() = fine_r / (2.0 * n);
  fine.imag() = fine_i / (2.0 * n);
  const double change = max_abs(fine - coarse);
  if (!(change <= options.tol)) {
    std::ostringstream msg;
    msg << "rotating_frame_average: doubling " << n << " slices changed the result by " << change
        << " (tolerance " << options.tol << ")";
    throw QuadratureNonConvergence(msg.str());
  }
  fine.diagonal().real() -= 0.5 * k * Omega * excit;
  OperatorMatrix out{0.5 * (fine + fine.adjoint()), false};
  out.mark_hermitian();
  return out;
}

}  // namespace dicke::floquet
