#pragma once

// Exact one-period propagation of the driven Dicke model
//
//   H(t) = omega a^dag a + omega0 J_z + g(t)/sqrt(N) (a^dag + a)(J_+ + J_-)
//          [+ alpha g(t)^2 / omega0 (a^dag + a)^2],   g(t) = g + dg cos(Omega t + phase),
//
// on the effective-model basis, plus the numerical time average of the
// Hamiltonian in the k-th rotating frame U_k(t) = exp(-i mu(t) X J_x)
// exp(-i k Omega t (J_z + a^dag a) / 2), mu(t) = 2 dg sin(Omega t) / (Omega sqrt N).

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dicke/core.hpp"
#include "dicke/effective.hpp"

namespace dicke::floquet {

inline constexpr int kDefaultSlices = 4096;
inline constexpr int kMinSlices = 500;
inline constexpr double kTolUnitary = 1e-8;
inline constexpr int kDefaultAverageSlices = 256;
inline constexpr double kTolQuadrature = 1e-7;

class UnitarityLoss : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureNonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct DriveConfig {
  ModelParams params;
  bool include_a2 = false;
  double alpha = 0.0;  // used only with include_a2
  double phase = 0.0;  // drive phase offset

  void validate() const;
  [[nodiscard]] double coupling_at(double t) const;
};

effective::OperatorMatrix hamiltonian_at(double t, const DriveConfig& cfg,
                                         const effective::QuantumBasis& basis);

struct FloquetResult {
  Eigen::MatrixXcd floquet_operator;  // U(T)
  std::vector<double> quasienergies;  // ascending in (-Omega/2, Omega/2]
  Eigen::MatrixXcd floquet_modes;     // columns, same order as quasienergies
  double unitarity_defect = 0.0;      // ||U^dag U - 1||_max
};

/// Folds e into (-Omega/2, Omega/2].
double fold_quasienergy(double e, double Omega);

/// Midpoint exponential product over n_slices equal slices. Throws
/// InvalidArgument below kMinSlices and UnitarityLoss above kTolUnitary.
FloquetResult propagate_period(const DriveConfig& cfg, const effective::QuantumBasis& basis,
                               int n_slices = kDefaultSlices);

struct CrosscheckReport {
  int k = 0;
  std::vector<double> h0_eigenvalues;         // lowest n_low of h0^(k)
  std::vector<double> matched_quasienergies;  // Floquet partner of each
  std::vector<double> fidelities;             // overlap summed over the partner's cluster
  std::vector<double> quasienergy_errors;     // difference mismatch relative to the lowest, mod Omega
  double mean_fidelity = 0.0;
  double min_fidelity = 0.0;
  double unitarity_defect = 0.0;
};

struct CrosscheckOptions {
  int n_slices = kDefaultSlices;
  double cluster_tol = 1e-6;  // times Omega; Floquet modes closer than this form one cluster
};

/// Compares the n_low lowest eigenvectors of h0^(k) (full for k = 0, second
/// order otherwise) with the Floquet modes of U(T) at t = 0.
CrosscheckReport rwa_crosscheck(const DriveConfig& cfg, int k,
                                const effective::QuantumBasis& basis, std::size_t n_low,
                                const CrosscheckOptions& options = {});

struct AverageOptions {
  int n_slices = kDefaultAverageSlices;
  int fock_padding = effective::kDefaultFockPadding;
  double tol = kTolQuadrature;
};

/// (1/T) int_0^T U_k^dag (H - i d/dt) U_k dt by the trapezoid rule, checked
/// against the rule with twice the slices. Computed on a Fock space padded by
/// fock_padding levels and projected onto the basis.
effective::OperatorMatrix rotating_frame_average(const DriveConfig& cfg, int k,
                                                 const effective::QuantumBasis& basis,
                                                 const AverageOptions& options = {});

}  // namespace dicke::floquet
