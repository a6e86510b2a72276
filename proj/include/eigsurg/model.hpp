#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eigsurg/error.hpp"
#include "eigsurg/numerics.hpp"

namespace eigsurg {

/// Open-loop model x' = A x + B u. Shapes and finiteness are enforced on
/// construction.
class SystemPair {
public:
    SystemPair(RealMatrix A, RealMatrix B);

    const RealMatrix& A() const noexcept { return A_; }
    const RealMatrix& B() const noexcept { return B_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(A_.rows()); }
    std::size_t m() const noexcept { return static_cast<std::size_t>(B_.cols()); }

private:
    RealMatrix A_;
    RealMatrix B_;
};

/// One specified eigenvalue with its eigenvector, or with a generalized
/// eigenvector when chain_parent names its Jordan predecessor.
struct EigenTarget {
    Complex eigenvalue;
    ComplexVector vector;
    std::optional<std::size_t> chain_parent;

    bool is_generalized() const noexcept { return chain_parent.has_value(); }
};

struct SurgicalProblem {
    SystemPair system;
    std::vector<EigenTarget> specified;   // L1 and V1, chain parents first
    std::vector<Complex> free_eigenvalues;  // L2
    Tolerances tolerances;

    std::size_t n() const noexcept { return system.n(); }
    std::size_t r() const noexcept { return specified.size(); }

    /// Throws DimensionMismatch unless vector lengths equal n, r + |L2| == n
    /// and every chain_parent indexes into the specified list.
    void check_shapes() const;

    /// L1 followed by L2, the full closed-loop spectrum being requested.
    std::vector<Complex> requested_spectrum() const;

    /// [v_1 ... v_r] as an n x r matrix.
    ComplexMatrix target_vectors() const;
};

enum class Condition {
    LinearIndependence,  // (i)
    ConjugateSymmetry,   // (ii)
    Admissibility,       // (iii)
    FreeSelfConjugate,   // (iv)
    ChainOrder,
    Controllability,
};

std::string_view to_string(Condition c) noexcept;

struct Violation {
    Condition condition;
    std::vector<std::size_t> indices;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

/// Thrown by synthesize() when the problem fails a structural check.
class ProblemInvalidError : public Error {
public:
    explicit ProblemInvalidError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Conjugate partners among the specified targets, as (upper, lower) index
/// pairs where `upper` has the positive-imaginary eigenvalue.
using ConjugatePairing = std::vector<std::pair<std::size_t, std::size_t>>;

struct InputDirections {
    std::vector<ComplexVector> z;  // one per specified target, list order
};

/// True when |Im(lambda)| is within the pairing tolerance.
bool is_real(Complex lambda, const Tolerances& tol) noexcept;

/// Conditions (i), (ii), (iv) and chain ordering. Empty result means the
/// problem is structurally sound; violations are data, never thrown.
std::vector<Violation> validate_structure(const SurgicalProblem& p);

/// rank [B, AB, ..., A^(n-1) B] == n, with block columns normalised before
/// the rank decision.
bool check_controllability(const SystemPair& s, const Tolerances& tol);

/// Popov-Belevitch-Hautus form of the same test: rank [A - lambda I, B] == n
/// at every eigenvalue of A. Better conditioned than the Krylov matrix.
bool check_controllability_pbh(const RealMatrix& A, const RealMatrix& B, const Tolerances& tol);

/// Conjugate pairing of the specified targets. Throws PairingMismatch when
/// a complex target has no partner; real targets are left unpaired.
ConjugatePairing target_pairing(const SurgicalProblem& p);

/// Minimum-norm z_i with (A - lambda_i I) v_i + B z_i = c_i where c_i is 0 for
/// eigenvectors and v_parent for generalized eigenvectors. Throws
/// Inadmissible(i) when c_i is not in range(B). Partners get exact conjugates.
InputDirections compute_input_directions(const SurgicalProblem& p);

/// Replace each conjugate column pair by (Re, Im) of the upper member, Re at
/// the lower index. Unpaired columns must be real and pass through.
RealMatrix realify_columns(const ComplexMatrix& V, const ConjugatePairing& pairing, const Tolerances& tol);

/// Parse a problem document (JSON). Throws Schema with a field path on
/// malformed input and DimensionMismatch on inconsistent sizes.
SurgicalProblem parse_problem(std::string_view text);

}  // namespace eigsurg
