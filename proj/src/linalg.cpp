#include "wwlab/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wwlab {
namespace {

constexpr double kHermitianTol = 1e-10;

template <typename Matrix>
double logdet_psd_impl(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::domain_error("logdet_psd: matrix must be square");
  if (a.size() == 0) throw std::domain_error("logdet_psd: matrix must be nonempty");
  if (!a.allFinite()) throw std::domain_error("logdet_psd: matrix has non-finite entries");
  const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol) throw std::domain_error("logdet_psd: matrix is not Hermitian");

  const Matrix sym = ((a + a.adjoint()) / 2.0).eval();
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    const auto& packed = llt.matrixLLT();  // L occupies the lower triangle
    double acc = 0.0;
    for (Eigen::Index i = 0; i < packed.rows(); ++i) acc += std::log(std::real(packed(i, i)));
    return 2.0 * acc;
  }

  // Cholesky rejects semidefinite input; decide indefinite vs singular from
  // the spectrum.
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::domain_error("logdet_psd: eigensolver failed");
  const Eigen::VectorXd evals = es.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  if (evals.minCoeff() < -kHermitianTol * scale) {
    throw std::domain_error("logdet_psd: matrix is not positive semidefinite");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    const double lambda = evals(i);
    if (lambda <= 0.0) return -std::numeric_limits<double>::infinity();
    acc += std::log(lambda);
  }
  return acc;
}

template <typename Matrix>
double spectral_norm_impl(const Matrix& a) {
  if (a.size() == 0) throw std::invalid_argument("spectral_norm: matrix must be nonempty");
  if (!a.allFinite()) throw std::invalid_argument("spectral_norm: matrix has non-finite entries");
  if (a.norm() == 0.0) return 0.0;

  // Gram matrix of the shorter side keeps the iteration cheap.
  const Matrix gram = (a.cols() <= a.rows()) ? Matrix(a.adjoint() * a) : Matrix(a * a.adjoint());
  const Eigen::Index n = gram.rows();

  Xoshiro256pp gen(RngStream{0x5eedULL, 0});
  using Vector = Eigen::Matrix<typename Matrix::Scalar, Eigen::Dynamic, 1>;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = typename Matrix::Scalar(2.0 * gen.uniform01() - 1.0);
  v.normalize();

  double lambda = 0.0;
  for (int iter = 0; iter < kSpectralNormMaxIter; ++iter) {
    Vector w = gram * v;
    const double wn = w.norm();
    if (wn == 0.0) {
      // v landed in the null space; redraw
      for (Eigen::Index i = 0; i < n; ++i) v(i) = typename Matrix::Scalar(2.0 * gen.uniform01() - 1.0);
      v.normalize();
      continue;
    }
    const double rayleigh = std::real(v.dot(w));  // real for Hermitian PSD gram
    v = w / wn;
    if (std::abs(rayleigh - lambda) <= 1e-13 * std::max(rayleigh, 1e-300)) {
      lambda = rayleigh;
      break;
    }
    lambda = rayleigh;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace

void require_finite(const Eigen::Ref<const ComplexMatrix>& a, const char* what) {
  if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

void require_finite(const Eigen::Ref<const RealMatrix>& a, const char* what) {
  if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

ComplexMatrix sample_complex_gaussian(Eigen::Index rows, Eigen::Index cols, RngStream rng) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("sample_complex_gaussian: dimensions must be at least 1");
  }
  Xoshiro256pp gen(rng);
  ComplexMatrix out(rows, cols);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double re, im;
      gen.gaussian_pair(re, im);
      out(r, c) = std::complex<double>(re * inv_sqrt2, im * inv_sqrt2);
    }
  }
  return out;
}

double logdet_psd(const ComplexMatrix& a) { return logdet_psd_impl(a); }
double logdet_psd(const RealMatrix& a) { return logdet_psd_impl(a); }

double spectral_norm(const ComplexMatrix& a) { return spectral_norm_impl(a); }
double spectral_norm(const RealMatrix& a) { return spectral_norm_impl(a); }

}  // namespace wwlab
