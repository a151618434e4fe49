#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "dicke/effective.hpp"

namespace dicke::effective {

// Explicitly restarted Lanczos. Each cycle builds an m-step Krylov basis with
// full reorthogonalisation, takes Ritz pairs from the tridiagonal projection
// and restarts from the sum of the wanted Ritz vectors.
EigenPairs lanczos_lowest(const Eigen::MatrixXcd& H, std::size_t n_eigs, double tol,
                          int max_restarts) {
  using Eigen::Index;
  using cvec = Eigen::VectorXcd;
  const Index dim = H.rows();
  if (n_eigs == 0 || static_cast<Index>(n_eigs) > dim)
    throw InvalidArgument("lanczos: need 1 <= n_eigs <= dim");
  const Index want = static_cast<Index>(n_eigs);
  const Index m_max = std::min<Index>(dim, std::max<Index>(3 * want + 60, 160));

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  cvec v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = {normal(rng), 0.0};
  v.normalize();

  Eigen::MatrixXcd V(dim, m_max);
  const double h_scale = std::max(1.0, H.cwiseAbs().rowwise().sum().maxCoeff());

  for (int cycle = 0; cycle <= max_restarts; ++cycle) {
    Eigen::VectorXd alpha(m_max);
    Eigen::VectorXd beta(m_max);
    Index m = 0;
    V.col(0) = v;
    for (Index j = 0; j < m_max; ++j) {
      cvec w = H * V.col(j);
      alpha[j] = V.col(j).dot(w).real();
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass)
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
      m = j + 1;
      const double b = w.norm();
      beta[j] = b;
      if (j + 1 == m_max || b < 1e-14 * h_scale) break;
      V.col(j + 1) = w / b;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(alpha.head(m), beta.head(m - 1), Eigen::ComputeEigenvectors);
    if (tri.info() != Eigen::Success) throw EigensolverFailure("lanczos: tridiagonal solve failed");
    if (m < want) throw EigensolverFailure("lanczos: Krylov space smaller than n_eigs");

    EigenPairs out;
    out.vectors = V.leftCols(m) * tri.eigenvectors().leftCols(want).cast<std::complex<double>>();
    bool converged = true;
    for (Index i = 0; i < want; ++i) {
      const double theta = tri.eigenvalues()[i];
      out.values.push_back(theta);
      const double res = (H * out.vectors.col(i) - theta * out.vectors.col(i)).norm();
      if (res > tol * h_scale) converged = false;
    }
    if (converged || m == dim) return out;

    v = out.vectors.rowwise().sum();
    v.normalize();
  }
  throw EigensolverFailure("lanczos: no convergence within the restart budget");
}

}  // namespace dicke::effective
