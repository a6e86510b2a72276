#include "eigsurg/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace eigsurg {

void Tolerances::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(rank_rel) || !ok(residual_abs) || !ok(match_abs)) {
        throw Error(ErrorKind::Schema, "tolerances must be finite and strictly positive");
    }
}

namespace numerics {
namespace {

template <typename Matrix>
void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) {
        throw Error(ErrorKind::Kernel, std::string(what) + ": non-finite input");
    }
}

template <typename Matrix>
RealVector singular_values_impl(const Matrix& M) {
    if (M.size() == 0) return RealVector(0);
    require_finite(M, "singular_values");
    Eigen::JacobiSVD<Matrix> svd(M);
    if (svd.info() != Eigen::Success) {
        throw Error(ErrorKind::Kernel, "SVD did not converge");
    }
    return svd.singularValues();
}

std::size_t count_above(const RealVector& sv, double rank_rel) {
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cutoff = rank_rel * sv(0);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++k;
    }
    return k;
}

template <typename Matrix>
Matrix nullspace_impl(const Matrix& M, const Tolerances& tol) {
    const Eigen::Index cols = M.cols();
    if (M.rows() == 0) return Matrix::Identity(cols, cols);
    if (cols == 0) return Matrix(0, 0);
    require_finite(M, "nullspace_basis");
    Eigen::JacobiSVD<Matrix, Eigen::FullPivHouseholderQRPreconditioner> svd(M, Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) {
        throw Error(ErrorKind::Kernel, "SVD did not converge");
    }
    const auto k = static_cast<Eigen::Index>(count_above(svd.singularValues(), tol.rank_rel));
    return svd.matrixV().rightCols(cols - k);
}

template <typename Matrix, typename Vector>
Vector min_norm_solve_impl(const Matrix& M, const Vector& b, const Tolerances& tol) {
    if (M.rows() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch, "min_norm_solve: row count differs from rhs length");
    }
    if (M.cols() == 0) return Vector(0);
    if (M.rows() == 0) return Vector::Zero(M.cols());
    require_finite(M, "min_norm_solve");
    require_finite(b, "min_norm_solve");
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw Error(ErrorKind::Kernel, "SVD did not converge");
    }
    svd.setThreshold(tol.rank_rel);
    return svd.solve(b);
}

}  // namespace

RealVector singular_values(const RealMatrix& M) { return singular_values_impl(M); }
RealVector singular_values(const ComplexMatrix& M) { return singular_values_impl(M); }

std::size_t rank(const RealMatrix& M, const Tolerances& tol) {
    return count_above(singular_values(M), tol.rank_rel);
}

std::size_t rank(const ComplexMatrix& M, const Tolerances& tol) {
    return count_above(singular_values(M), tol.rank_rel);
}

double spectral_norm(const RealMatrix& M) {
    const RealVector sv = singular_values(M);
    return sv.size() == 0 ? 0.0 : sv(0);
}

double condition_number(const RealMatrix& M) {
    const RealVector sv = singular_values(M);
    if (sv.size() == 0) return 1.0;
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

ComplexMatrix nullspace_basis(const ComplexMatrix& M, const Tolerances& tol) { return nullspace_impl(M, tol); }
RealMatrix nullspace_basis(const RealMatrix& M, const Tolerances& tol) { return nullspace_impl(M, tol); }

ComplexVector min_norm_solve(const ComplexMatrix& M, const ComplexVector& b, const Tolerances& tol) {
    return min_norm_solve_impl(M, b, tol);
}

RealVector min_norm_solve(const RealMatrix& M, const RealVector& b, const Tolerances& tol) {
    return min_norm_solve_impl(M, b, tol);
}

RealMatrix min_norm_right_solve(const RealMatrix& V, const RealMatrix& Z, const Tolerances& tol) {
    if (V.cols() != Z.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "min_norm_right_solve: V and Z column counts differ");
    }
    const Eigen::Index n = V.rows();
    const Eigen::Index r = V.cols();
    if (r > n) {
        throw Error(ErrorKind::RankDeficient, "min_norm_right_solve: more columns than rows");
    }
    if (r == 0) return RealMatrix::Zero(Z.rows(), n);
    require_finite(V, "min_norm_right_solve");
    require_finite(Z, "min_norm_right_solve");

    Eigen::JacobiSVD<RealMatrix> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw Error(ErrorKind::Kernel, "SVD did not converge");
    }
    const RealVector& sv = svd.singularValues();
    if (count_above(sv, tol.rank_rel) != static_cast<std::size_t>(r)) {
        throw Error(ErrorKind::RankDeficient, "min_norm_right_solve: V does not have full column rank");
    }
    // V = U S W^T  =>  pinv(V) = W S^-1 U^T  and  X = Z W S^-1 U^T.
    const RealMatrix ZW = Z * svd.matrixV();
    return ZW * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

EigenDecomposition eig(const RealMatrix& M) {
    if (M.rows() != M.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "eig: matrix is not square");
    }
    EigenDecomposition out;
    if (M.rows() == 0) {
        out.vectors = ComplexMatrix(0, 0);
        return out;
    }
    require_finite(M, "eig");
    Eigen::EigenSolver<RealMatrix> solver(M, true);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::Kernel, "eigenvalue iteration did not converge");
    }
    const ComplexVector values = solver.eigenvalues();
    out.values.assign(values.data(), values.data() + values.size());
    out.vectors = solver.eigenvectors();
    for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
        const double norm = out.vectors.col(j).norm();
        if (norm > 0.0) out.vectors.col(j) /= norm;
    }
    return out;
}

std::vector<Complex> eigenvalues(const RealMatrix& M) {
    if (M.rows() != M.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "eigenvalues: matrix is not square");
    }
    if (M.rows() == 0) return {};
    require_finite(M, "eigenvalues");
    Eigen::EigenSolver<RealMatrix> solver(M, false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::Kernel, "eigenvalue iteration did not converge");
    }
    const ComplexVector values = solver.eigenvalues();
    return {values.data(), values.data() + values.size()};
}

RealMatrix orthonormal_completion(const RealMatrix& V, const Tolerances& tol) {
    const Eigen::Index n = V.rows();
    const Eigen::Index r = V.cols();
    if (r >= n) {
        throw Error(ErrorKind::DimensionMismatch, "orthonormal_completion: requires fewer columns than rows");
    }
    if (r == 0) return RealMatrix::Identity(n, n);
    if (rank(V, tol) != static_cast<std::size_t>(r)) {
        throw Error(ErrorKind::RankDeficient, "orthonormal_completion: V does not have full column rank");
    }
    // The trailing n - r columns of the full Q factor span range(V)^perp.
    Eigen::HouseholderQR<RealMatrix> qr(V);
    const RealMatrix Q = qr.householderQ() * RealMatrix::Identity(n, n);
    return Q.rightCols(n - r);
}

RealMatrix invert(const RealMatrix& M, const Tolerances& tol) {
    if (M.rows() != M.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "invert: matrix is not square");
    }
    const Eigen::Index n = M.rows();
    if (n == 0) return RealMatrix(0, 0);
    if (rank(M, tol) != static_cast<std::size_t>(n)) {
        throw Error(ErrorKind::Singular, "invert: matrix is singular at tolerance");
    }
    return M.fullPivLu().inverse();
}

}  // namespace numerics
}  // namespace eigsurg
