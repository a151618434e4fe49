#pragma once

// Finite-N rotating-wave effective Hamiltonians h0^(k), k = 0, 1, 2, on a
// truncated Fock space times the exact j = N/2 collective-spin multiplet.
//
// Basis ordering is |n> (x) |j, m> with the Fock index n outer and the spin
// projection m = -j..+j inner: index = n (N + 1) + (m + j).
//
// Operators that are not polynomial in single ladder operators (the Bessel
// factor and the squared quadrature) are formed on a Fock space padded by
// `fock_padding` extra levels and then projected back, so that the matrices are
// compressions P f(a + a^dag) P of the untruncated operators rather than
// functions of the truncated quadrature.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dicke/core.hpp"

namespace dicke::effective {

inline constexpr int kDefaultFockPadding = 32;
inline constexpr std::size_t kDenseEigenLimit = 4000;

class EigensolverFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct QuantumBasis {
  int n_atoms = 1;  // N, sets j = N / 2
  int n_max = 1;    // Fock cutoff

  void validate() const;
  [[nodiscard]] std::size_t fock_dim() const { return static_cast<std::size_t>(n_max) + 1; }
  [[nodiscard]] std::size_t spin_dim() const { return static_cast<std::size_t>(n_atoms) + 1; }
  [[nodiscard]] std::size_t dim() const { return fock_dim() * spin_dim(); }
  [[nodiscard]] double j() const { return 0.5 * n_atoms; }
  [[nodiscard]] std::size_t index(int n, int m_index) const {
    return static_cast<std::size_t>(n) * spin_dim() + static_cast<std::size_t>(m_index);
  }
  [[nodiscard]] QuantumBasis with_cutoff(int cutoff) const { return {n_atoms, cutoff}; }
};

struct OperatorMatrix {
  Eigen::MatrixXcd m;
  bool hermitian = false;

  [[nodiscard]] Eigen::Index dim() const { return m.rows(); }
  [[nodiscard]] double hermiticity_defect() const;
  /// Sets the flag after checking ||H - H^dag||_max < tol; throws otherwise.
  void mark_hermitian(double tol = 1e-12);
};

// -- single-factor building blocks (real) ------------------------------------

Eigen::MatrixXd fock_annihilation(std::size_t fock_dim);
Eigen::MatrixXd fock_number(std::size_t fock_dim);
/// Top-left block of (a + a^dag)^2 on a space one level larger.
Eigen::MatrixXd compressed_quadrature_squared(std::size_t fock_dim);
Eigen::MatrixXd spin_jz(int n_atoms);
Eigen::MatrixXd spin_jplus(int n_atoms);

/// Fock (x) spin with the basis ordering above.
Eigen::MatrixXd tensor(const Eigen::MatrixXd& fock, const Eigen::MatrixXd& spin);

struct Operators {
  OperatorMatrix a, adag, jz, jp, jm, jx, quadrature;
};

Operators build_operators(const QuantumBasis& basis);

/// Diagonal parity exp[i pi (a^dag a + J_z + j)] = (-1)^(n + m + j).
OperatorMatrix parity_operator(const QuantumBasis& basis);

/// J0(scale (a^dag + a)) from the spectral decomposition of the quadrature on
/// fock_dim + fock_padding levels, projected back onto the basis.
OperatorMatrix bessel_of_quadrature(const QuantumBasis& basis, double scale,
                                    int fock_padding = kDefaultFockPadding);

enum class Variant { Full, SecondOrder };

/// h0^(k) assembled term by term. Variant::Full exists only for k = 0;
/// k outside {0, 1, 2} or (k > 0, Full) throws UnsupportedVariant.
OperatorMatrix build_h0(int k, const ModelParams& params, const QuantumBasis& basis,
                        Variant variant, int fock_padding = kDefaultFockPadding);

struct SpectrumResult {
  std::vector<double> eigenvalues;  // ascending, lowest n_eigs
  Eigen::VectorXcd ground_state;
  double order_field = 0.0;  // 2 <a^dag a> / N
  double order_atom = 0.0;   // 2 <J_z> / N + 1
};

struct SpectrumOptions {
  std::size_t dense_limit = kDenseEigenLimit;
  double lanczos_tol = 1e-11;
  int lanczos_max_restarts = 40;
};

SpectrumResult spectrum(const OperatorMatrix& H, std::size_t n_eigs, const QuantumBasis& basis,
                        const SpectrumOptions& options = {});

/// Lowest n_eigs eigenpairs of a Hermitian matrix by restarted Lanczos with
/// full reorthogonalisation. Eigenvectors are returned as columns.
struct EigenPairs {
  std::vector<double> values;
  Eigen::MatrixXcd vectors;
};
EigenPairs lanczos_lowest(const Eigen::MatrixXcd& H, std::size_t n_eigs, double tol = 1e-11,
                          int max_restarts = 40);

/// Fock cutoff default: max(40, 10 N (g + dg)^2 / omega^2).
int default_fock_cutoff(const ModelParams& params, int n_atoms);

struct EffectiveSolution {
  SpectrumResult spectrum;
  QuantumBasis basis;
  double cutoff_defect = 0.0;  // max eigenvalue shift under n_max -> n_max + 8
};

/// build_h0 + spectrum, with the n_max + 8 convergence check reported.
EffectiveSolution solve_effective(int k, const ModelParams& params, const QuantumBasis& basis,
                                  Variant variant, std::size_t n_eigs,
                                  const SpectrumOptions& options = {});

/// Critical couplings of the k-th resonance (negative values dropped).
///   k = 0: g = sqrt((omega + 2 omega0 r^2)(omega0 + 2 omega r^2)) / 2, r = dg/Omega,
///          which is omega/2 + omega r^2 on resonance omega = omega0
///   k = 1: g = -dg/2 + |delta1 + omega r^2|
///   k = 2: g = delta2 + omega r^2 / 2 and g = -delta2 - 3 omega r^2 / 2
std::vector<double> critical_line(int k, const ModelParams& params);

/// The same branches in fixed order with negative values kept.
std::vector<double> critical_branches(int k, const ModelParams& params);

/// Ratios entering the rotating-wave validity conditions; reported, never enforced.
struct RwaValidity {
  int k = 0;
  double scale = 0.0;  // Omega * max(1, dg / Omega)
  double g_over_scale = 0.0;
  double omega_over_scale = 0.0;
  double omega0_over_scale = 0.0;
  double dg_over_omega = 0.0;
  double delta_over_omega = 0.0;    // |delta^(k)| / omega
  double delta0_over_omega0 = 0.0;  // |delta0^(k)| / omega0
  double drive_sq = 0.0;            // (dg / Omega)^2
};

RwaValidity rwa_validity(const ModelParams& params, int k);

/// Abscissa of the steepest rise of y(x) on an ascending grid: the largest
/// forward difference, refined by a parabola through the neighbouring slopes.
double steepest_rise(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dicke::effective
