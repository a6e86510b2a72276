#include "eigsurg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace eigsurg {
namespace {

// Backward-error allowance, in units of machine epsilon times ||M||, that a
// perturbed multiple eigenvalue is allowed to reflect before a cluster is
// considered genuinely split.
constexpr double kClusterGrowth = 1e4;

double cluster_radius(std::size_t size, double scale, double amplification) {
    const double eps = std::numeric_limits<double>::epsilon();
    return scale * std::pow(kClusterGrowth * eps * amplification, 1.0 / static_cast<double>(size));
}

}  // namespace

std::vector<SpectrumMatch> match_spectra(const std::vector<Complex>& achieved, const std::vector<Complex>& target,
                                         const Tolerances& /*tol*/) {
    if (achieved.size() != target.size()) {
        throw Error(ErrorKind::DimensionMismatch, "match_spectra: lists differ in length");
    }
    const std::size_t n = achieved.size();
    using Candidate = std::tuple<double, int, std::size_t, std::size_t>;
    std::vector<Candidate> candidates;
    candidates.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const bool same_half = (achieved[i].imag() >= 0.0) == (target[j].imag() >= 0.0);
            candidates.emplace_back(std::abs(achieved[i] - target[j]), same_half ? 0 : 1, i, j);
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> used_a(n, false), used_t(n, false);
    std::vector<SpectrumMatch> out;
    out.reserve(n);
    for (const auto& [d, half, i, j] : candidates) {
        if (used_a[i] || used_t[j]) continue;
        used_a[i] = used_t[j] = true;
        out.push_back({i, j, d});
        if (out.size() == n) break;
    }
    return out;
}

SpectrumComparison compare_spectrum(const RealMatrix& M, const std::vector<Complex>& target, const Tolerances& tol,
                                    double amplification) {
    const std::vector<Complex> raw = numerics::eigenvalues(M);
    if (raw.size() != target.size()) {
        throw Error(ErrorKind::DimensionMismatch, "target spectrum size differs from the matrix order");
    }
    const std::size_t n = raw.size();
    const double scale = std::max(1.0, numerics::spectral_norm(M));

    std::vector<std::size_t> achieved_of(n);
    for (const auto& m : match_spectra(raw, target, tol)) achieved_of[m.target_index] = m.achieved_index;

    // Repeated target values, by single linkage within match_abs.
    std::vector<std::size_t> group(n);
    for (std::size_t i = 0; i < n; ++i) group[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(target[i] - target[j]) <= tol.match_abs) {
                const std::size_t from = group[j], to = group[i];
                for (auto& g : group) {
                    if (g == from) g = to;
                }
            }
        }
    }

    SpectrumComparison out;
    out.pairs.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.pairs[i] = {target[i], raw[achieved_of[i]], 0.0, 1};

    for (std::size_t g = 0; g < n; ++g) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (group[i] == g) members.push_back(i);
        }
        if (members.size() < 2) continue;
        Complex mean{0.0, 0.0};
        for (std::size_t i : members) mean += raw[achieved_of[i]];
        mean /= static_cast<double>(members.size());
        double spread = 0.0;
        for (std::size_t i : members) spread = std::max(spread, std::abs(raw[achieved_of[i]] - mean));
        if (spread > cluster_radius(members.size(), scale, std::max(1.0, amplification))) continue;
        for (std::size_t i : members) {
            out.pairs[i].achieved = mean;
            out.pairs[i].cluster_size = members.size();
        }
    }

    for (auto& pr : out.pairs) {
        pr.distance = std::abs(pr.achieved - pr.target);
        out.max_distance = std::max(out.max_distance, pr.distance);
    }
    return out;
}

double spectrum_distance(const RealMatrix& M, const std::vector<Complex>& target, const Tolerances& tol,
                         double amplification) {
    return compare_spectrum(M, target, tol, amplification).max_distance;
}

std::vector<double> chain_residuals(const RealMatrix& Acl, const SurgicalProblem& p) {
    if (Acl.rows() != Acl.cols() || static_cast<std::size_t>(Acl.rows()) != p.n()) {
        throw Error(ErrorKind::DimensionMismatch, "chain_residuals: closed-loop matrix must be n x n");
    }
    const ComplexMatrix Ac = Acl.cast<Complex>();
    std::vector<double> out;
    out.reserve(p.r());
    for (const auto& t : p.specified) {
        ComplexVector res = Ac * t.vector - t.eigenvalue * t.vector;
        if (t.chain_parent) res -= p.specified[*t.chain_parent].vector;
        out.push_back(res.norm());
    }
    return out;
}

VerificationReport verify_closed_loop(const SystemPair& s, const RealMatrix& F, const SurgicalProblem& p,
                                      const StageData* stage) {
    if (F.rows() != static_cast<Eigen::Index>(s.m()) || F.cols() != static_cast<Eigen::Index>(s.n())) {
        throw Error(ErrorKind::DimensionMismatch, "gain must be m x n");
    }
    if (p.n() != s.n()) {
        throw Error(ErrorKind::DimensionMismatch, "problem and system dimensions differ");
    }
    const auto& tol = p.tolerances;
    const RealMatrix Acl = s.A() + s.B() * F;

    VerificationReport report;
    const std::vector<Complex> target = p.requested_spectrum();
    // Chains among the specified vectors are only as resolvable as those vectors are independent.
    double amplification = 1.0;
    if (p.r() > 0) {
        const RealVector sv = numerics::singular_values(p.target_vectors());
        amplification = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : 1.0;
    }
    SpectrumComparison cmp = compare_spectrum(Acl, target, tol, amplification);
    report.eigenvalue_pairs = std::move(cmp.pairs);
    report.max_pair_distance = cmp.max_distance;

    report.target_residuals = chain_residuals(Acl, p);
    report.residual_bound = tol.residual_abs * (1.0 + numerics::spectral_norm(s.A()) +
                                                numerics::spectral_norm(s.B()) * numerics::spectral_norm(F));
    report.gain_norm = F.norm();

    if (stage) {
        report.f1_annihilation =
            stage->V01.cols() == 0 ? 0.0 : numerics::spectral_norm(RealMatrix(stage->F1 * stage->V01));
        report.cond_V0 = stage->cond_V0;
    }

    const bool residuals_ok =
        std::all_of(report.target_residuals.begin(), report.target_residuals.end(),
                    [&](double r) { return r <= report.residual_bound; });
    report.passed = report.max_pair_distance <= tol.match_abs && residuals_ok;
    return report;
}

}  // namespace eigsurg
