#pragma once

#include <optional>
#include <vector>

#include "eigsurg/model.hpp"

namespace eigsurg {

struct EigenvaluePair {
    Complex target;
    Complex achieved;
    double distance = 0.0;
    std::size_t cluster_size = 1;  // > 1 when the achieved value is a cluster mean

    bool operator==(const EigenvaluePair&) const = default;
};

struct VerificationReport {
    std::vector<EigenvaluePair> eigenvalue_pairs;
    double max_pair_distance = 0.0;
    std::vector<double> target_residuals;
    double residual_bound = 0.0;            // scaled bound the residuals were held to
    std::optional<double> f1_annihilation;  // ||F1 V01||, only with stage data
    std::optional<double> cond_V0;
    double gain_norm = 0.0;                 // ||F||_F
    bool passed = false;

    bool operator==(const VerificationReport&) const = default;
};

/// Synthesis intermediates that verify_closed_loop can report on. They never
/// influence `passed`.
struct StageData {
    RealMatrix F1;
    RealMatrix V01;
    double cond_V0 = 1.0;
};

struct SpectrumMatch {
    std::size_t achieved_index;
    std::size_t target_index;
    double distance;
};

/// Greedy perfect matching by ascending distance. Ties prefer pairs whose
/// imaginary parts share a sign, so conjugate pairs map onto conjugate pairs.
std::vector<SpectrumMatch> match_spectra(const std::vector<Complex>& achieved, const std::vector<Complex>& target,
                                         const Tolerances& tol);

/// eig(M) matched against `target`, one pair per target in target order.
///
/// A p-fold defective eigenvalue is only determined to about eps^(1/p) by any
/// backward-stable eigensolver, while the mean of the computed cluster is
/// accurate to O(eps). Where the target list repeats a value p times, the p
/// achieved eigenvalues matched to it are replaced by their mean, provided
/// they all lie within the spread an O(eps ||M||) perturbation of a p-fold
/// eigenvalue can produce. A split wider than that is reported as is.
/// `amplification` multiplies that perturbation when M carries more error
/// than its own rounding, e.g. when it was formed through an ill-conditioned
/// basis or its Jordan vectors are themselves ill-conditioned.
struct SpectrumComparison {
    std::vector<EigenvaluePair> pairs;
    double max_distance = 0.0;
};
SpectrumComparison compare_spectrum(const RealMatrix& M, const std::vector<Complex>& target, const Tolerances& tol,
                                    double amplification = 1.0);

/// compare_spectrum(M, target, tol, amplification).max_distance
double spectrum_distance(const RealMatrix& M, const std::vector<Complex>& target, const Tolerances& tol,
                         double amplification = 1.0);

/// ||(Acl - lambda_i I) v_i - c_i|| per specified target, c_i = 0 or v_parent.
std::vector<double> chain_residuals(const RealMatrix& Acl, const SurgicalProblem& p);

/// Checks A + B F against the requested spectrum and specified vectors using
/// only (A, B, F, problem).
VerificationReport verify_closed_loop(const SystemPair& s, const RealMatrix& F, const SurgicalProblem& p,
                                      const StageData* stage = nullptr);

}  // namespace eigsurg
