#pragma once

#include <Eigen/Dense>

#include "wwlab/rng.hpp"

namespace wwlab {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const ComplexMatrix>& a, const char* what);
void require_finite(const Eigen::Ref<const RealMatrix>& a, const char* what);

/// i.i.d. circularly symmetric complex Gaussian entries with zero mean and
/// unit variance (real and imaginary parts each N(0, 1/2)). Pure function of
/// (rows, cols, stream): the same stream always yields the same matrix.
ComplexMatrix sample_complex_gaussian(Eigen::Index rows, Eigen::Index cols, RngStream rng);

/// ln det(a) for a Hermitian positive semidefinite matrix, via Cholesky with
/// an eigenvalue fallback near the semidefinite boundary. Never forms the
/// determinant itself. Hermiticity is enforced to 1e-10 entrywise; indefinite
/// input raises std::domain_error. A singular PSD input returns -inf.
double logdet_psd(const ComplexMatrix& a);
double logdet_psd(const RealMatrix& a);

/// Largest singular value, by power iteration on the Gram matrix of the
/// shorter side. Iteration cap kSpectralNormMaxIter; accurate to about 1e-8
/// relative on matrices whose top singular values are not pathologically
/// clustered.
inline constexpr int kSpectralNormMaxIter = 10000;
double spectral_norm(const ComplexMatrix& a);
double spectral_norm(const RealMatrix& a);

}  // namespace wwlab
