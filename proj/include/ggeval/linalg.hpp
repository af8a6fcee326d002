#pragma once

#include "ggeval/graph.hpp"
#include "ggeval/rng.hpp"

namespace ggeval {

/// Largest singular value of w by power iteration on the Gram matrix.
///
/// The iteration is accelerated by repeated squaring: after s squarings the
/// normalized Gram power is (W^T W)^(2^s), which has collapsed onto the top
/// eigenspace even when the leading singular values are nearly tied. A few
/// plain power steps then polish the vector and the result is the square root
/// of its Rayleigh quotient.
double SpectralNorm(const Matrix& w);

/// rows x cols matrix with orthonormal columns (rows >= cols) or orthonormal
/// rows (rows < cols), from the QR factorization of a Gaussian matrix with
/// the sign convention diag(R) > 0.
Matrix RandomOrthogonal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Symmetric positive semidefinite square root via eigendecomposition, with
/// negative eigenvalues clamped to zero.
Matrix PsdSqrt(const Matrix& symmetric);

}  // namespace ggeval
