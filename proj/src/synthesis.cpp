#include "eigsurg/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace eigsurg {
namespace {

using Eigen::Dynamic;
using Eigen::Index;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Dynamic, Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Dynamic, 1>;

// Runs `fn`, tagging any Error that escapes with the pipeline stage.
template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    }
}

// Uniform on [-1, 1) from the raw 64-bit stream, so retries are reproducible
// across standard library implementations.
double uniform_pm1(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

template <typename Scalar>
Scalar random_scalar(std::mt19937_64& rng) {
    if constexpr (std::is_same_v<Scalar, double>) {
        return uniform_pm1(rng);
    } else {
        const double re = uniform_pm1(rng);
        return Scalar(re, uniform_pm1(rng));
    }
}

template <typename Scalar>
Mat<Scalar> random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    Mat<Scalar> G(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) G(i, j) = random_scalar<Scalar>(rng);
    return G;
}

struct TargetGroup {
    Complex value;
    std::size_t multiplicity;
};

// Collect repeated targets (within match_abs) and keep the real and
// upper-half groups; lower-half groups must mirror an upper group exactly.
std::vector<TargetGroup> group_targets(const std::vector<Complex>& targets, const Tolerances& tol) {
    std::vector<TargetGroup> groups;
    for (const Complex& t : targets) {
        const Complex snapped = is_real(t, tol) ? Complex(t.real(), 0.0) : t;
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const TargetGroup& g) { return std::abs(g.value - snapped) <= tol.match_abs; });
        if (it != groups.end()) {
            ++it->multiplicity;
        } else {
            groups.push_back({snapped, 1});
        }
    }
    std::vector<TargetGroup> kept;
    for (const auto& g : groups) {
        if (g.value.imag() < 0.0) {
            const bool mirrored = std::any_of(groups.begin(), groups.end(), [&](const TargetGroup& u) {
                return u.value.imag() > 0.0 && u.multiplicity == g.multiplicity &&
                       std::abs(u.value - std::conj(g.value)) <= tol.match_abs;
            });
            if (!mirrored) {
                throw Error(ErrorKind::ProblemInvalid, "free eigenvalues are not closed under conjugation");
            }
            continue;
        }
        kept.push_back(g);
    }
    return kept;
}

// Closed-loop vectors for one target value mu of multiplicity p: columns of
// U (state part) and Y (input part) with (L - mu I) u_j + B2 y_j = 0 for the
// eigenvectors and = u_{j-1} for the chain links.
template <typename Scalar>
bool build_group(const RealMatrix& L, const RealMatrix& B2, Scalar mu, std::size_t p, const Tolerances& tol,
                 std::mt19937_64* rng, Mat<Scalar>& U, Mat<Scalar>& Y) {
    const Index k = L.rows();
    const Index m = B2.cols();
    Mat<Scalar> M(k, k + m);
    M.leftCols(k) = L.cast<Scalar>() - mu * Mat<Scalar>::Identity(k, k);
    M.rightCols(m) = B2.cast<Scalar>();

    const Mat<Scalar> N = numerics::nullspace_basis(M, tol);
    if (N.cols() == 0) return false;

    // Rotate the null-space basis so the state parts come out orthogonal and
    // sorted by size; only directions with a non-negligible state part are usable.
    Eigen::JacobiSVD<Mat<Scalar>> svd(N.topRows(k), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Index usable = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol.rank_rel * sv(0)) ++usable;
    }
    if (usable == 0) return false;
    const Mat<Scalar> basis = N * svd.matrixV().leftCols(usable);

    const Index g = std::min<Index>(static_cast<Index>(p), usable);
    Mat<Scalar> chosen = rng ? Mat<Scalar>(basis * random_matrix<Scalar>(usable, g, *rng)) : basis.leftCols(g);

    U.resize(k, static_cast<Index>(p));
    Y.resize(m, static_cast<Index>(p));
    for (Index j = 0; j < g; ++j) {
        const Vec<Scalar> col = chosen.col(j) / chosen.col(j).topRows(k).norm();
        U.col(j) = col.topRows(k);
        Y.col(j) = col.bottomRows(m);
    }

    // Remaining multiplicity goes into one Jordan chain hanging off the first
    // eigenvector.
    Vec<Scalar> prev = U.col(0);
    for (Index j = g; j < static_cast<Index>(p); ++j) {
        Vec<Scalar> link = numerics::min_norm_solve(M, prev, tol);
        if (rng) {
            const double scale = std::max(1.0, link.norm());
            link += N * random_matrix<Scalar>(N.cols(), 1, *rng) * scale;
        }
        if ((M * link - prev).norm() > tol.residual_abs * (1.0 + M.norm()) * (1.0 + link.norm())) return false;
        U.col(j) = link.topRows(k);
        Y.col(j) = link.bottomRows(m);
        prev = U.col(j);
    }
    return true;
}

}  // namespace

Stage0Result stage0(const SurgicalProblem& p, const InputDirections& z) {
    const auto& tol = p.tolerances;
    const auto& A = p.system.A();
    const auto& B = p.system.B();
    const auto m = static_cast<Index>(p.system.m());
    const auto r = static_cast<Index>(p.r());
    if (z.z.size() != p.r()) {
        throw Error(ErrorKind::DimensionMismatch, "one input direction per specified target is required");
    }

    const ConjugatePairing pairing = target_pairing(p);
    ComplexMatrix Z(m, r);
    for (Index i = 0; i < r; ++i) {
        if (z.z[static_cast<std::size_t>(i)].size() != m) {
            throw Error(ErrorKind::DimensionMismatch, "input direction length differs from m");
        }
        Z.col(i) = z.z[static_cast<std::size_t>(i)];
    }

    Stage0Result out;
    out.V01 = realify_columns(p.target_vectors(), pairing, tol);
    out.Z01 = realify_columns(Z, pairing, tol);
    out.F0 = numerics::min_norm_right_solve(out.V01, out.Z01, tol);
    out.closed0 = A + B * out.F0;

    const ComplexMatrix C0 = out.closed0.cast<Complex>();
    const double bound = tol.residual_abs * (1.0 + numerics::spectral_norm(A) +
                                             numerics::spectral_norm(B) * numerics::spectral_norm(out.F0));
    for (std::size_t i = 0; i < p.r(); ++i) {
        const auto& t = p.specified[i];
        const Complex lambda = is_real(t.eigenvalue, tol) ? Complex(t.eigenvalue.real(), 0.0) : t.eigenvalue;
        ComplexVector res = C0 * t.vector - lambda * t.vector;
        if (t.chain_parent) res -= p.specified[*t.chain_parent].vector;
        if (res.norm() > bound * std::max(1.0, t.vector.norm())) {
            throw Error(ErrorKind::InvarianceViolated,
                        "A + B F0 does not carry specified target " + std::to_string(i), i);
        }
    }
    return out;
}

InvariantDecomposition decompose(const Stage0Result& s0, const SystemPair& s, const Tolerances& tol) {
    const Index n = s0.closed0.rows();
    const Index r = s0.V01.cols();
    if (s0.V01.rows() != n || static_cast<std::size_t>(n) != s.n()) {
        throw Error(ErrorKind::DimensionMismatch, "decompose: stage-0 data does not match the system");
    }

    InvariantDecomposition dec;
    dec.r = r;
    dec.V0.resize(n, n);
    dec.V0.leftCols(r) = s0.V01;
    if (r < n) dec.V0.rightCols(n - r) = numerics::orthonormal_completion(s0.V01, tol);
    if (numerics::rank(s0.V01, tol) < static_cast<std::size_t>(r)) {
        throw Error(ErrorKind::Singular, "decompose: specified vectors do not span an r-dimensional subspace");
    }
    // With V02 orthonormal and orthogonal to V01, inv(V0) = [pinv(V01); V02^T]
    // exactly. Forming it this way keeps W02 free of the cond(V01) error an
    // explicit inverse would spread into F1.
    dec.W0.resize(n, n);
    dec.W0.topRows(r) = numerics::min_norm_right_solve(s0.V01, RealMatrix::Identity(r, r), tol);
    dec.W0.bottomRows(n - r) = dec.V0.rightCols(n - r).transpose();
    dec.cond_V0 = numerics::condition_number(dec.V0);

    const RealMatrix T = dec.W0 * s0.closed0 * dec.V0;
    dec.Lambda011 = T.topLeftCorner(r, r);
    dec.Lambda012 = T.topRightCorner(r, n - r);
    dec.Lambda022 = T.bottomRightCorner(n - r, n - r);

    if (r > 0 && r < n) {
        const double leak = numerics::spectral_norm(RealMatrix(T.bottomLeftCorner(n - r, r)));
        const double bound =
            tol.residual_abs * (1.0 + numerics::spectral_norm(RealMatrix(dec.W02())) *
                                          numerics::spectral_norm(s0.closed0) * numerics::spectral_norm(s0.V01));
        if (leak > bound) {
            throw Error(ErrorKind::InvarianceViolated, "span of the specified vectors is not invariant under A + B F0");
        }
    }
    dec.B2 = dec.W02() * s.B();
    return dec;
}

PlacementResult reduced_placement(const RealMatrix& Lambda022, const RealMatrix& B2,
                                  const std::vector<Complex>& targets, const Tolerances& tol, std::uint64_t seed) {
    const Index k = Lambda022.rows();
    const Index m = B2.cols();
    if (Lambda022.cols() != k || B2.rows() != k) {
        throw Error(ErrorKind::DimensionMismatch, "reduced_placement: Lambda022 must be square with B2 conforming");
    }
    if (static_cast<Index>(targets.size()) != k) {
        throw Error(ErrorKind::DimensionMismatch, "reduced_placement: need exactly one target per reduced state");
    }
    if (k == 0) return {RealMatrix::Zero(m, 0), 1};
    if (!check_controllability_pbh(Lambda022, B2, tol)) {
        throw Error(ErrorKind::NotControllable, "reduced pair (Lambda022, B2) is not controllable");
    }

    const std::vector<TargetGroup> groups = group_targets(targets, tol);

    for (int attempt = 0; attempt <= kPlacementRetries; ++attempt) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(attempt)};
        std::mt19937_64 engine(seq);
        std::mt19937_64* rng = attempt == 0 ? nullptr : &engine;

        RealMatrix U(k, k);
        RealMatrix Y(m, k);
        Index col = 0;
        bool built = true;
        for (const auto& g : groups) {
            if (g.value.imag() == 0.0) {
                RealMatrix Ug, Yg;
                if (!build_group<double>(Lambda022, B2, g.value.real(), g.multiplicity, tol, rng, Ug, Yg)) {
                    built = false;
                    break;
                }
                U.middleCols(col, Ug.cols()) = Ug;
                Y.middleCols(col, Yg.cols()) = Yg;
                col += Ug.cols();
            } else {
                ComplexMatrix Ug, Yg;
                if (!build_group<Complex>(Lambda022, B2, g.value, g.multiplicity, tol, rng, Ug, Yg)) {
                    built = false;
                    break;
                }
                for (Index j = 0; j < Ug.cols(); ++j) {
                    U.col(col) = Ug.col(j).real();
                    U.col(col + 1) = Ug.col(j).imag();
                    Y.col(col) = Yg.col(j).real();
                    Y.col(col + 1) = Yg.col(j).imag();
                    col += 2;
                }
            }
        }
        if (!built) continue;
        if (col != k) {
            throw Error(ErrorKind::DimensionMismatch, "reduced_placement: target grouping does not cover the reduced order");
        }
        if (numerics::rank(U, tol) != static_cast<std::size_t>(k)) continue;

        RealMatrix D = numerics::min_norm_right_solve(U, Y, tol);
        const RealMatrix closed = Lambda022 + B2 * D;
        if (!closed.allFinite()) continue;
        if (spectrum_distance(closed, targets, tol) > tol.match_abs) continue;
        return {std::move(D), attempt + 1};
    }
    throw Error(ErrorKind::SelectionFailed,
                "reduced placement found no independent eigenvector set after " +
                    std::to_string(kPlacementRetries) + " retries");
}

RealMatrix stage1(const InvariantDecomposition& dec, const RealMatrix& D, const Tolerances& tol) {
    const Index n = dec.V0.rows();
    const Index k = n - dec.r;
    if (D.cols() != k || dec.B2.cols() != D.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "stage1: D must be m x (n - r)");
    }
    if (k == 0) return RealMatrix::Zero(D.rows(), n);

    RealMatrix F1 = D * dec.W02();
    if (dec.r > 0) {
        const RealMatrix V01 = dec.V01();
        const double leak = numerics::spectral_norm(RealMatrix(F1 * V01));
        const double bound = tol.residual_abs * (1.0 + numerics::spectral_norm(D) *
                                                           numerics::spectral_norm(RealMatrix(dec.W02())) *
                                                           numerics::spectral_norm(V01));
        if (leak > bound) {
            throw Error(ErrorKind::InvarianceViolated, "F1 does not vanish on the specified vectors");
        }
    }
    return F1;
}

GainResult synthesize(const SurgicalProblem& p, std::uint64_t seed) {
    const auto& tol = p.tolerances;
    in_stage("validate", [&] {
        tol.validate();
        std::vector<Violation> violations = validate_structure(p);
        if (!violations.empty()) throw ProblemInvalidError(std::move(violations));
        if (!check_controllability(p.system, tol)) {
            throw ProblemInvalidError({{Condition::Controllability, {}, "(A, B) is not controllable"}});
        }
    });

    const InputDirections z = in_stage("input_directions", [&] { return compute_input_directions(p); });
    const Stage0Result s0 = in_stage("stage0", [&] { return stage0(p, z); });
    InvariantDecomposition dec = in_stage("decompose", [&] {
        InvariantDecomposition d = decompose(s0, p.system, tol);
        std::vector<Complex> L1;
        for (const auto& t : p.specified) L1.push_back(t.eigenvalue);
        // Lambda011 is formed through W01, so it carries cond(V0) times the rounding of closed0.
        const double amplification =
            d.cond_V0 * std::max(1.0, numerics::spectral_norm(s0.closed0) /
                                          std::max(1.0, numerics::spectral_norm(d.Lambda011)));
        if (!L1.empty() && spectrum_distance(d.Lambda011, L1, tol, amplification) > tol.match_abs) {
            throw Error(ErrorKind::InvarianceViolated, "restriction to the specified subspace has the wrong spectrum");
        }
        return d;
    });
    const PlacementResult placed = in_stage("reduced_placement", [&] {
        return reduced_placement(dec.Lambda022, dec.B2, p.free_eigenvalues, tol, seed);
    });
    RealMatrix F1 = in_stage("stage1", [&] { return stage1(dec, placed.D, tol); });

    GainResult out;
    out.F0 = s0.F0;
    out.F1 = std::move(F1);
    out.F = out.F0 + out.F1;
    out.D = placed.D;
    out.seed = seed;
    out.placement_attempts = placed.attempts;
    const StageData stage{out.F1, RealMatrix(dec.V01()), dec.cond_V0};
    out.report = in_stage("verify", [&] { return verify_closed_loop(p.system, out.F, p, &stage); });
    out.decomposition = std::move(dec);
    return out;
}

}  // namespace eigsurg
