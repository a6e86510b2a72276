#include "eigsurg/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace eigsurg {

using numerics::rank;

SystemPair::SystemPair(RealMatrix A, RealMatrix B) : A_(std::move(A)), B_(std::move(B)) {
    if (A_.rows() < 1 || A_.rows() != A_.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "A must be square with n >= 1");
    }
    if (B_.rows() != A_.rows() || B_.cols() < 1) {
        throw Error(ErrorKind::DimensionMismatch, "B must have n rows and m >= 1 columns");
    }
    if (!A_.allFinite() || !B_.allFinite()) {
        throw Error(ErrorKind::Schema, "A and B must have finite entries");
    }
}

void SurgicalProblem::check_shapes() const {
    const std::size_t dim = n();
    if (r() + free_eigenvalues.size() != dim) {
        std::ostringstream os;
        os << "specified (" << r() << ") + free eigenvalues (" << free_eigenvalues.size()
           << ") must equal state dimension " << dim;
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    for (std::size_t i = 0; i < r(); ++i) {
        const auto& t = specified[i];
        if (static_cast<std::size_t>(t.vector.size()) != dim) {
            throw Error(ErrorKind::DimensionMismatch,
                        "specified[" + std::to_string(i) + "].vector length differs from n", i);
        }
        if (t.chain_parent && *t.chain_parent >= r()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "specified[" + std::to_string(i) + "].chain_parent out of range", i);
        }
    }
}

std::vector<Complex> SurgicalProblem::requested_spectrum() const {
    std::vector<Complex> out;
    out.reserve(n());
    for (const auto& t : specified) out.push_back(t.eigenvalue);
    out.insert(out.end(), free_eigenvalues.begin(), free_eigenvalues.end());
    return out;
}

ComplexMatrix SurgicalProblem::target_vectors() const {
    ComplexMatrix V(static_cast<Eigen::Index>(n()), static_cast<Eigen::Index>(r()));
    for (std::size_t i = 0; i < r(); ++i) V.col(static_cast<Eigen::Index>(i)) = specified[i].vector;
    return V;
}

std::string_view to_string(Condition c) noexcept {
    switch (c) {
        case Condition::LinearIndependence: return "condition-i";
        case Condition::ConjugateSymmetry: return "condition-ii";
        case Condition::Admissibility: return "condition-iii";
        case Condition::FreeSelfConjugate: return "condition-iv";
        case Condition::ChainOrder: return "chain-order";
        case Condition::Controllability: return "controllability";
    }
    return "unknown";
}

namespace {

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "problem invalid:";
    for (const auto& v : violations) {
        os << ' ' << to_string(v.condition) << '{';
        for (std::size_t k = 0; k < v.indices.size(); ++k) os << (k ? "," : "") << v.indices[k];
        os << '}';
    }
    return os.str();
}

bool vector_is_real(const ComplexVector& v, const Tolerances& tol) {
    return v.imag().norm() <= tol.residual_abs * std::max(1.0, v.norm());
}

struct PairingScan {
    ConjugatePairing pairs;
    std::vector<std::size_t> unpaired;              // complex eigenvalue, no partner
    std::vector<std::size_t> complex_on_real;       // real eigenvalue, complex vector
    std::vector<std::pair<std::size_t, std::size_t>> chain_mismatch;
};

PairingScan scan_pairing(const SurgicalProblem& p) {
    const auto& tol = p.tolerances;
    const std::size_t r = p.r();
    PairingScan scan;
    std::vector<bool> used(r, false);
    std::vector<std::optional<std::size_t>> partner(r);

    for (std::size_t i = 0; i < r; ++i) {
        const auto& ti = p.specified[i];
        if (is_real(ti.eigenvalue, tol)) {
            if (!vector_is_real(ti.vector, tol)) scan.complex_on_real.push_back(i);
            continue;
        }
        if (used[i]) continue;
        const double vtol = tol.residual_abs * std::max(1.0, ti.vector.norm());
        bool found = false;
        for (std::size_t k = 0; k < r; ++k) {
            if (k == i || used[k]) continue;
            const auto& tk = p.specified[k];
            if (is_real(tk.eigenvalue, tol)) continue;
            if (std::abs(tk.eigenvalue - std::conj(ti.eigenvalue)) > tol.match_abs) continue;
            if ((tk.vector - ti.vector.conjugate()).norm() > vtol) continue;
            used[i] = used[k] = true;
            partner[i] = k;
            partner[k] = i;
            if (ti.eigenvalue.imag() > 0.0) {
                scan.pairs.emplace_back(i, k);
            } else {
                scan.pairs.emplace_back(k, i);
            }
            found = true;
            break;
        }
        if (!found) scan.unpaired.push_back(i);
    }

    // Chains must mirror across the pair: parent(partner(i)) == partner(parent(i)).
    for (const auto& [a, b] : scan.pairs) {
        const auto pa = p.specified[a].chain_parent;
        const auto pb = p.specified[b].chain_parent;
        if (!pa && !pb) continue;
        const bool mirrored = pa && pb && *pa < r && partner[*pa] && *partner[*pa] == *pb;
        if (!mirrored) scan.chain_mismatch.emplace_back(a, b);
    }
    return scan;
}

// c in range(B), decided by comparing ranks of column-normalised [B] and [B | c].
bool in_range(const ComplexMatrix& B, const ComplexVector& c, const Tolerances& tol) {
    const double cn = c.norm();
    if (cn == 0.0) return true;
    const double bn = B.norm();
    if (bn == 0.0) return false;
    ComplexMatrix aug(B.rows(), B.cols() + 1);
    aug.leftCols(B.cols()) = B / bn;
    aug.col(B.cols()) = c / cn;
    return rank(aug, tol) == rank(ComplexMatrix(B / bn), tol);
}

}  // namespace

ProblemInvalidError::ProblemInvalidError(std::vector<Violation> violations)
    : Error(ErrorKind::ProblemInvalid, describe(violations)), violations_(std::move(violations)) {}

bool is_real(Complex lambda, const Tolerances& tol) noexcept {
    return std::abs(lambda.imag()) <= tol.match_abs;
}

std::vector<Violation> validate_structure(const SurgicalProblem& p) {
    p.check_shapes();
    const auto& tol = p.tolerances;
    const std::size_t r = p.r();
    std::vector<Violation> out;

    // (i) linear independence. Columns taking part in a null vector are the culprits.
    if (r > 0) {
        const ComplexMatrix V = p.target_vectors();
        const ComplexMatrix N = numerics::nullspace_basis(V, tol);
        if (N.cols() > 0) {
            std::vector<std::size_t> idx;
            for (Eigen::Index j = 0; j < N.rows(); ++j) {
                if (N.row(j).cwiseAbs().maxCoeff() > 1e-8) idx.push_back(static_cast<std::size_t>(j));
            }
            out.push_back({Condition::LinearIndependence, idx, "target vectors are linearly dependent"});
        }
    }

    // (ii) conjugate symmetry of targets and of chain structure.
    const PairingScan scan = scan_pairing(p);
    for (std::size_t i : scan.unpaired) {
        out.push_back({Condition::ConjugateSymmetry, {i}, "complex target has no conjugate partner"});
    }
    for (std::size_t i : scan.complex_on_real) {
        out.push_back({Condition::ConjugateSymmetry, {i}, "real eigenvalue with complex vector"});
    }
    for (const auto& [a, b] : scan.chain_mismatch) {
        out.push_back({Condition::ConjugateSymmetry, {std::min(a, b), std::max(a, b)},
                       "conjugate targets have non-mirrored chain structure"});
    }

    // Chain ordering: parent precedes child, shares its eigenvalue, one child per parent.
    std::map<std::size_t, std::vector<std::size_t>> children;
    for (std::size_t i = 0; i < r; ++i) {
        const auto parent = p.specified[i].chain_parent;
        if (!parent) continue;
        if (*parent >= i) {
            out.push_back({Condition::ChainOrder, {i}, "chain parent must precede its child"});
            continue;
        }
        if (std::abs(p.specified[*parent].eigenvalue - p.specified[i].eigenvalue) > tol.match_abs) {
            out.push_back({Condition::ChainOrder, {*parent, i}, "chain parent has a different eigenvalue"});
        }
        children[*parent].push_back(i);
    }
    for (const auto& [parent, kids] : children) {
        if (kids.size() > 1) {
            out.push_back({Condition::ChainOrder, kids, "several targets share one chain parent"});
        }
    }

    // (iv) free eigenvalues self-conjugate.
    const auto& L2 = p.free_eigenvalues;
    std::vector<bool> used(L2.size(), false);
    std::vector<std::size_t> lonely;
    for (std::size_t i = 0; i < L2.size(); ++i) {
        if (used[i] || is_real(L2[i], tol)) continue;
        bool found = false;
        for (std::size_t k = 0; k < L2.size(); ++k) {
            if (k == i || used[k] || is_real(L2[k], tol)) continue;
            if (std::abs(L2[k] - std::conj(L2[i])) <= tol.match_abs) {
                used[i] = used[k] = true;
                found = true;
                break;
            }
        }
        if (!found) lonely.push_back(i);
    }
    if (!lonely.empty()) {
        out.push_back({Condition::FreeSelfConjugate, lonely, "free eigenvalues are not closed under conjugation"});
    }
    return out;
}

bool check_controllability(const SystemPair& s, const Tolerances& tol) {
    const auto n = static_cast<Eigen::Index>(s.n());
    const auto m = static_cast<Eigen::Index>(s.m());
    RealMatrix K(n, n * m);
    RealMatrix block = s.B();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j > 0) block = s.A() * block;
        const double bn = numerics::spectral_norm(block);
        K.middleCols(j * m, m) = bn > 0.0 ? RealMatrix(block / bn) : block;
    }
    return rank(K, tol) == s.n();
}

bool check_controllability_pbh(const RealMatrix& A, const RealMatrix& B, const Tolerances& tol) {
    const Eigen::Index n = A.rows();
    if (n == 0) return true;
    if (B.cols() == 0) return false;
    const double bn = numerics::spectral_norm(B);
    if (bn == 0.0) return false;
    const ComplexMatrix Bs = (B * ((1.0 + numerics::spectral_norm(A)) / bn)).cast<Complex>();
    for (const Complex& lambda : numerics::eigenvalues(A)) {
        if (lambda.imag() < 0.0) continue;  // conjugate gives the same rank
        ComplexMatrix M(n, n + B.cols());
        M.leftCols(n) = A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
        M.rightCols(B.cols()) = Bs;
        if (rank(M, tol) != static_cast<std::size_t>(n)) return false;
    }
    return true;
}

ConjugatePairing target_pairing(const SurgicalProblem& p) {
    PairingScan scan = scan_pairing(p);
    if (!scan.unpaired.empty()) {
        throw Error(ErrorKind::PairingMismatch, "complex target has no conjugate partner", scan.unpaired.front());
    }
    if (!scan.complex_on_real.empty()) {
        throw Error(ErrorKind::PairingMismatch, "real eigenvalue paired with complex vector",
                    scan.complex_on_real.front());
    }
    if (!scan.chain_mismatch.empty()) {
        throw Error(ErrorKind::PairingMismatch, "conjugate targets have non-mirrored chains",
                    scan.chain_mismatch.front().first);
    }
    return scan.pairs;
}

InputDirections compute_input_directions(const SurgicalProblem& p) {
    const auto& tol = p.tolerances;
    const auto& A = p.system.A();
    const auto& B = p.system.B();
    const double anorm = numerics::spectral_norm(A);
    const ConjugatePairing pairing = target_pairing(p);

    std::vector<std::optional<std::size_t>> lower_of(p.r());
    std::vector<bool> is_lower(p.r(), false);
    for (const auto& [upper, lower] : pairing) {
        lower_of[upper] = lower;
        is_lower[lower] = true;
    }

    InputDirections out;
    out.z.assign(p.r(), ComplexVector());
    const ComplexMatrix Bc = B.cast<Complex>();
    for (std::size_t i = 0; i < p.r(); ++i) {
        if (is_lower[i]) continue;
        const auto& t = p.specified[i];
        const bool real_target = is_real(t.eigenvalue, tol);
        const Complex lambda = real_target ? Complex(t.eigenvalue.real(), 0.0) : t.eigenvalue;
        const ComplexVector v = real_target ? ComplexVector(t.vector.real().cast<Complex>()) : t.vector;

        ComplexVector c = -(A.cast<Complex>() * v - lambda * v);
        if (t.chain_parent) {
            const ComplexVector& parent = p.specified[*t.chain_parent].vector;
            c += real_target ? ComplexVector(parent.real().cast<Complex>()) : parent;
        }
        if (!in_range(Bc, c, tol)) {
            throw Error(ErrorKind::Inadmissible,
                        "target " + std::to_string(i) + ": required input direction is outside range(B)", i);
        }

        ComplexVector z;
        if (real_target) {
            z = numerics::min_norm_solve(RealMatrix(B), RealVector(c.real()), tol).cast<Complex>();
        } else {
            z = numerics::min_norm_solve(Bc, c, tol);
        }
        const double bound = tol.residual_abs * (1.0 + anorm) * std::max(1.0, v.norm());
        if ((Bc * z - c).norm() > bound) {
            throw Error(ErrorKind::Inadmissible,
                        "target " + std::to_string(i) + ": input direction residual exceeds tolerance", i);
        }
        out.z[i] = z;
        if (lower_of[i]) out.z[*lower_of[i]] = z.conjugate();
    }
    return out;
}

RealMatrix realify_columns(const ComplexMatrix& V, const ConjugatePairing& pairing, const Tolerances& tol) {
    const Eigen::Index cols = V.cols();
    RealMatrix out = V.real();
    std::vector<bool> paired(static_cast<std::size_t>(cols), false);
    for (const auto& [upper, lower] : pairing) {
        const auto u = static_cast<Eigen::Index>(upper);
        const auto l = static_cast<Eigen::Index>(lower);
        if (u >= cols || l >= cols || u == l || paired[upper] || paired[lower]) {
            throw Error(ErrorKind::PairingMismatch, "invalid column pairing", upper);
        }
        const double vtol = tol.residual_abs * std::max(1.0, V.col(u).norm());
        if ((V.col(l) - V.col(u).conjugate()).norm() > vtol) {
            throw Error(ErrorKind::PairingMismatch,
                        "columns " + std::to_string(upper) + " and " + std::to_string(lower) + " are not conjugate",
                        lower);
        }
        paired[upper] = paired[lower] = true;
        out.col(std::min(u, l)) = V.col(u).real();
        out.col(std::max(u, l)) = V.col(u).imag();
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
        if (paired[static_cast<std::size_t>(j)]) continue;
        if (!vector_is_real(V.col(j), tol)) {
            throw Error(ErrorKind::NotReal, "unpaired column " + std::to_string(j) + " is not real",
                        static_cast<std::size_t>(j));
        }
    }
    return out;
}

}  // namespace eigsurg
