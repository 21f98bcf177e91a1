#pragma once

#include <Eigen/Dense>

#include "hybridsteer/common.hpp"
#include "hybridsteer/fock.hpp"

namespace hst::test {

/// Random full-rank density matrix (Ginibre ensemble).
inline DensityMatrix random_density(int dim, SplitMix64& rng,
                                    std::vector<int> mode_dims = {}) {
  Eigen::MatrixXcd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
  Eigen::MatrixXcd m = g * g.adjoint();
  m /= m.trace().real();
  DensityMatrix rho;
  rho.mat = 0.5 * (m + m.adjoint().eval());
  rho.mode_dims = mode_dims.empty() ? std::vector<int>{dim} : std::move(mode_dims);
  return rho;
}

/// Random pure-state density matrix.
inline DensityMatrix random_pure(int dim, SplitMix64& rng, std::vector<int> mode_dims = {}) {
  Eigen::VectorXcd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.cnormal();
  v /= v.norm();
  DensityMatrix rho;
  rho.mat = v * v.adjoint();
  rho.mode_dims = mode_dims.empty() ? std::vector<int>{dim} : std::move(mode_dims);
  return rho;
}

/// Random unitary via QR of a Ginibre matrix.
inline Eigen::MatrixXcd random_unitary(int dim, SplitMix64& rng) {
  Eigen::MatrixXcd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  return q;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace hst::test
