#pragma once

#include <cstdint>
#include <vector>

#include "eigsurg/model.hpp"
#include "eigsurg/verify.hpp"

namespace eigsurg {

/// First-stage gain: F0 maps each specified vector onto its input direction,
/// so A + B F0 carries the specified eigenstructure.
struct Stage0Result {
    RealMatrix F0;       // m x n
    RealMatrix V01;      // n x r, realified specified vectors
    RealMatrix Z01;      // m x r, realified input directions
    RealMatrix closed0;  // A + B F0
};

/// Real basis V0 = [V01 | V02] adapted to the invariant subspace span(V01) of
/// A + B F0, with W0 = inv(V0) and the blocks of W0 (A + B F0) V0.
struct InvariantDecomposition {
    RealMatrix V0;
    RealMatrix W0;
    RealMatrix Lambda011;
    RealMatrix Lambda012;
    RealMatrix Lambda022;
    RealMatrix B2;  // W02 B
    Eigen::Index r = 0;
    double cond_V0 = 1.0;

    auto V01() const { return V0.leftCols(r); }
    auto V02() const { return V0.rightCols(V0.cols() - r); }
    auto W01() const { return W0.topRows(r); }
    auto W02() const { return W0.bottomRows(W0.rows() - r); }
};

struct GainResult {
    RealMatrix F0;
    RealMatrix F1;
    RealMatrix F;  // F0 + F1
    RealMatrix D;  // m x (n - r)
    InvariantDecomposition decomposition;
    VerificationReport report;
    std::uint64_t seed = 0;
    int placement_attempts = 0;  // 1 = deterministic first choice succeeded
};

Stage0Result stage0(const SurgicalProblem& p, const InputDirections& z);

InvariantDecomposition decompose(const Stage0Result& s0, const SystemPair& s, const Tolerances& tol);

struct PlacementResult {
    RealMatrix D;
    int attempts = 0;
};

/// Number of randomized retries after the deterministic first attempt.
inline constexpr int kPlacementRetries = 16;

/// Real D with spec(Lambda022 + B2 D) equal to `targets`, built by choosing
/// closed-loop eigenvectors (and Jordan chains for repeated targets beyond the
/// available null-space dimension) and solving D U = Y.
PlacementResult reduced_placement(const RealMatrix& Lambda022, const RealMatrix& B2,
                                  const std::vector<Complex>& targets, const Tolerances& tol, std::uint64_t seed);

/// F1 = D W02, which vanishes on span(V01).
RealMatrix stage1(const InvariantDecomposition& dec, const RealMatrix& D, const Tolerances& tol);

/// Full pipeline. Errors carry the stage that raised them; structural
/// failures throw ProblemInvalidError with the violation list.
GainResult synthesize(const SurgicalProblem& p, std::uint64_t seed = 0);

}  // namespace eigsurg
