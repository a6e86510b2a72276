#pragma once

// Dense real/complex kernel used by the synthesis pipeline. Everything here is
// a thin contract over Eigen: rank decisions use a relative SVD cutoff so that
// they are invariant under scaling of the input.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "eigsurg/error.hpp"

namespace eigsurg {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

struct Tolerances {
    double rank_rel = 1e-9;      // singular values below rank_rel * sigma_max are treated as zero
    double residual_abs = 1e-7;  // verification residual bound, scaled by operator norms at use sites
    double match_abs = 1e-6;     // eigenvalue pairing distance bound

    // Throws a Schema error unless every field is finite and strictly positive.
    void validate() const;
};

namespace numerics {

/// Singular values of M in descending order.
RealVector singular_values(const RealMatrix& M);
RealVector singular_values(const ComplexMatrix& M);

/// Number of singular values strictly above rank_rel * sigma_max. The zero
/// matrix (and any empty matrix) has rank 0.
std::size_t rank(const RealMatrix& M, const Tolerances& tol);
std::size_t rank(const ComplexMatrix& M, const Tolerances& tol);

/// Largest singular value; 0 for empty input.
double spectral_norm(const RealMatrix& M);

/// 2-norm condition number sigma_max / sigma_min; +inf for singular input.
double condition_number(const RealMatrix& M);

/// Orthonormal basis of the right null space of M (columns). Returns a
/// cols x 0 matrix when M has full column rank.
ComplexMatrix nullspace_basis(const ComplexMatrix& M, const Tolerances& tol);
RealMatrix nullspace_basis(const RealMatrix& M, const Tolerances& tol);

/// Minimum-Frobenius-norm X with X * V = Z, i.e. X = Z * pinv(V). V must have
/// full column rank; otherwise RankDeficient is thrown.
RealMatrix min_norm_right_solve(const RealMatrix& V, const RealMatrix& Z, const Tolerances& tol);

/// Minimum-norm least-squares solution of M x = b (pseudoinverse applied to b).
ComplexVector min_norm_solve(const ComplexMatrix& M, const ComplexVector& b, const Tolerances& tol);
RealVector min_norm_solve(const RealMatrix& M, const RealVector& b, const Tolerances& tol);

struct EigenDecomposition {
    std::vector<Complex> values;  // conjugate pairs for real input
    ComplexMatrix vectors;        // unit-norm columns; may be dependent for defective input
};

/// Eigenvalues and unit-norm eigenvectors of a real square matrix.
EigenDecomposition eig(const RealMatrix& M);

/// Eigenvalues only (cheaper, used for verification).
std::vector<Complex> eigenvalues(const RealMatrix& M);

/// Orthonormal columns spanning the orthogonal complement of range(V).
/// Requires rank(V) == V.cols() < V.rows().
RealMatrix orthonormal_completion(const RealMatrix& V, const Tolerances& tol);

/// Inverse of a square matrix that is nonsingular at tolerance.
RealMatrix invert(const RealMatrix& M, const Tolerances& tol);

}  // namespace numerics
}  // namespace eigsurg
