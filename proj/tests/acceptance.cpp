// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "eigsurg/cli.hpp"
#include "eigsurg/synthesis.hpp"
#include "support/problems.hpp"

using namespace eigsurg;
using fixtures::cvec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Runs a criterion body, turning any escaping exception into a failure line.
void criterion(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(id, title, ok, detail);
    } catch (const std::exception& e) {
        report(id, title, false, std::string("exception: ") + e.what());
    }
}

double max_entry_error(const RealMatrix& F, std::initializer_list<double> expected) {
    double worst = 0.0;
    Eigen::Index j = 0;
    for (double x : expected) worst = std::max(worst, std::abs(F(0, j++) - x));
    return worst;
}

// Eigenvalues straight from Eigen, bypassing the library.
std::vector<Complex> raw_eigenvalues(const RealMatrix& M) {
    Eigen::EigenSolver<RealMatrix> es(M, false);
    std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return out;
}

// Spectrum of A + B F for the stored double gain, formed and solved in long
// double. Closed loops with nearly defective eigenvectors lose several digits
// in a double eigen-solve; the extra precision measures the same matrix.
std::vector<Complex> closed_loop_eigenvalues(const RealMatrix& A, const RealMatrix& B, const RealMatrix& F) {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const LMat Acl = A.cast<long double>() + B.cast<long double>() * F.cast<long double>();
    Eigen::EigenSolver<LMat> es(Acl, false);
    std::vector<Complex> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto v = es.eigenvalues()(i);
        out.emplace_back(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    }
    return out;
}

// Optimal bottleneck assignment: the smallest achievable maximum pair distance
// over all perfect matchings (subset DP, fine for n <= 16).
double bottleneck_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    const std::size_t n = a.size();
    if (n != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<double> dp(std::size_t{1} << n, std::numeric_limits<double>::infinity());
    dp[0] = 0.0;
    for (std::size_t mask = 0; mask < dp.size(); ++mask) {
        if (!std::isfinite(dp[mask])) continue;
        const auto i = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (i == n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (mask & (std::size_t{1} << j)) continue;
            const std::size_t next = mask | (std::size_t{1} << j);
            dp[next] = std::min(dp[next], std::max(dp[mask], std::abs(a[i] - b[j])));
        }
    }
    return dp.back();
}

double norm2(const RealMatrix& M) { return M.size() == 0 ? 0.0 : numerics::spectral_norm(M); }

// Largest ||(A + B F - lambda_i I) v_i - c_i|| over the specified targets, computed directly.
double max_target_residual(const SurgicalProblem& p, const RealMatrix& F) {
    const ComplexMatrix Acl = (p.system.A() + p.system.B() * F).cast<Complex>();
    double worst = 0.0;
    for (const auto& t : p.specified) {
        ComplexVector r = Acl * t.vector - t.eigenvalue * t.vector;
        if (t.chain_parent) r -= p.specified[*t.chain_parent].vector;
        worst = std::max(worst, r.norm());
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Criterion 4 / 6 / 9 suite

struct SuiteOutcome {
    int instances = 0;
    int flagged = 0;  // cond(V0) > 1e8, reported but not counted
    int fail_a = 0, fail_b = 0, fail_c = 0, fail_d = 0, fail_eq3 = 0, errors = 0;
    double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0, worst_eq3 = 0.0;  // ratio to the allowed bound
    std::vector<std::string> gains;                                      // emit_gain per instance
    std::vector<std::string> notes;
    double seconds = 0.0;
};

constexpr std::uint64_t kSuiteSeed = 0x5eed2026;
constexpr int kSuiteSize = 500;

SuiteOutcome run_suite() {
    SuiteOutcome s;
    const auto t0 = Clock::now();
    fixtures::ProblemGenerator gen(kSuiteSeed, {.n_min = 2, .n_max = 8, .m_min = 1, .m_max = 3});
    for (int k = 0; k < kSuiteSize; ++k) {
        const SurgicalProblem p = gen.next();
        ++s.instances;
        GainResult g;
        try {
            g = synthesize(p, static_cast<std::uint64_t>(k));
        } catch (const std::exception& e) {
            ++s.errors;
            s.gains.emplace_back("error");
            if (s.notes.size() < 5) s.notes.push_back(fmt("instance %d: %s", k, e.what()));
            continue;
        }
        s.gains.push_back(emit_gain(g.F));
        if (g.decomposition.cond_V0 > 1e8) {
            ++s.flagged;
            continue;
        }
        const RealMatrix& A = p.system.A();
        const RealMatrix& B = p.system.B();
        const RealMatrix Acl = A + B * g.F;

        // (a) spectrum
        const double dist = bottleneck_distance(closed_loop_eigenvalues(A, B, g.F), p.requested_spectrum());
        const double bound_a = 1e-6 * (1.0 + norm2(A));
        s.worst_a = std::max(s.worst_a, dist / bound_a);
        if (!(dist <= bound_a)) {
            ++s.fail_a;
            if (s.notes.size() < 5) s.notes.push_back(fmt("instance %d (a): %.3g > %.3g", k, dist, bound_a));
        }

        // (b) specified-target residuals
        const double res = max_target_residual(p, g.F);
        const double bound_b = 1e-7 * (1.0 + norm2(A) + norm2(B) * norm2(g.F));
        s.worst_b = std::max(s.worst_b, res / bound_b);
        if (!(res <= bound_b)) {
            ++s.fail_b;
            if (s.notes.size() < 5) s.notes.push_back(fmt("instance %d (b): %.3g > %.3g", k, res, bound_b));
        }

        // (c) F1 annihilates span(V01)
        const RealMatrix V01 = g.decomposition.V01();
        const double ann = V01.cols() == 0 ? 0.0 : norm2(g.F1 * V01);
        const double bound_c = 1e-8 * (1.0 + norm2(g.F1) * norm2(V01));
        s.worst_c = std::max(s.worst_c, ann / bound_c);
        if (!(ann <= bound_c)) {
            ++s.fail_c;
            if (s.notes.size() < 5) s.notes.push_back(fmt("instance %d (c): %.3g > %.3g", k, ann, bound_c));
        }

        // (d) real, finite, and F = F0 + F1 exactly
        if (!g.F.allFinite() || g.F != (g.F0 + g.F1) || g.F.rows() != B.cols() || g.F.cols() != A.rows()) ++s.fail_d;

        // Criterion 6: the block form of W0 (A + B F) V0.
        const InvariantDecomposition& d = g.decomposition;
        const Eigen::Index n = A.rows(), r = d.r;
        RealMatrix blocked = RealMatrix::Zero(n, n);
        blocked.topLeftCorner(r, r) = d.Lambda011;
        blocked.topRightCorner(r, n - r) = d.Lambda012;
        blocked.bottomRightCorner(n - r, n - r) = d.Lambda022;
        RealMatrix perturbation = RealMatrix::Zero(n, n);
        perturbation.rightCols(n - r) = d.W0 * B * g.D;
        const double eq3 = norm2(d.W0 * Acl * d.V0 - (blocked + perturbation));
        const double bound_eq3 = 1e-8 * (1.0 + norm2(Acl));
        s.worst_eq3 = std::max(s.worst_eq3, eq3 / bound_eq3);
        if (!(eq3 <= bound_eq3)) {
            ++s.fail_eq3;
            if (s.notes.size() < 5) s.notes.push_back(fmt("instance %d (eq3): %.3g > %.3g", k, eq3, bound_eq3));
        }
    }
    s.seconds = seconds_since(t0);
    return s;
}

// ---------------------------------------------------------------------------
// Criterion 5: one-shot full assignment built without the library's synthesis.

// Null space of a complex matrix via full-pivot LU.
ComplexMatrix oracle_kernel(const ComplexMatrix& M) {
    Eigen::FullPivLU<ComplexMatrix> lu(M);
    lu.setThreshold(1e-10);
    return lu.kernel();
}

struct OracleGain {
    bool ok = false;
    RealMatrix F;
};

// Completes V1 with eigenvectors for each free eigenvalue, then solves
// F [v_1 .. v_n] = [z_1 .. z_n] in realified form.
OracleGain one_shot_gain(const SurgicalProblem& p, fixtures::ProblemGenerator& gen) {
    const RealMatrix& A = p.system.A();
    const RealMatrix& B = p.system.B();
    const Eigen::Index n = A.rows(), m = B.cols();
    const ComplexMatrix Ac = A.cast<Complex>(), Bc = B.cast<Complex>();
    const ComplexMatrix I = ComplexMatrix::Identity(n, n);

    std::vector<Complex> lambdas;
    std::vector<ComplexVector> vs, zs;
    for (const auto& t : p.specified) {
        // z from the normal equations of B z = -(A - lambda I) v.
        const ComplexVector c = -(Ac - t.eigenvalue * I) * t.vector;
        const ComplexVector z = Bc.completeOrthogonalDecomposition().solve(c);
        lambdas.push_back(t.eigenvalue);
        vs.push_back(t.vector);
        zs.push_back(z);
    }
    std::vector<bool> done(p.free_eigenvalues.size(), false);
    for (std::size_t i = 0; i < p.free_eigenvalues.size(); ++i) {
        if (done[i]) continue;
        const Complex mu = p.free_eigenvalues[i];
        ComplexMatrix M(n, n + m);
        M << Ac - mu * I, Bc;
        const ComplexMatrix N = oracle_kernel(M);
        if (N.cols() == 0) return {};
        ComplexVector coeff(N.cols());
        for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) = Complex(gen.uniform(-1, 1), gen.uniform(-1, 1));
        // LU of real data stays real, so a real combination gives a real eigenvector.
        if (mu.imag() == 0.0) coeff = coeff.real().cast<Complex>();
        const ComplexVector w = N * coeff;
        lambdas.push_back(mu);
        vs.push_back(w.head(n));
        zs.push_back(w.tail(m));
        done[i] = true;
        if (mu.imag() != 0.0) {
            for (std::size_t j = i + 1; j < p.free_eigenvalues.size(); ++j) {
                if (!done[j] && p.free_eigenvalues[j] == std::conj(mu)) {
                    lambdas.push_back(std::conj(mu));
                    vs.push_back(w.head(n).conjugate());
                    zs.push_back(w.tail(m).conjugate());
                    done[j] = true;
                    break;
                }
            }
        }
    }

    // Realify: for each conjugate pair keep (Re, Im) of the positive-imaginary member.
    RealMatrix V(n, n), Z(m, n);
    std::vector<bool> used(lambdas.size(), false);
    Eigen::Index col = 0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        if (lambdas[i].imag() == 0.0) {
            V.col(col) = vs[i].real();
            Z.col(col) = zs[i].real();
            ++col;
            continue;
        }
        std::size_t partner = lambdas.size();
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            if (!used[j] && std::abs(lambdas[j] - std::conj(lambdas[i])) < 1e-12) {
                partner = j;
                break;
            }
        }
        if (partner == lambdas.size()) return {};
        used[partner] = true;
        const std::size_t up = lambdas[i].imag() > 0.0 ? i : partner;
        V.col(col) = vs[up].real();
        V.col(col + 1) = vs[up].imag();
        Z.col(col) = zs[up].real();
        Z.col(col + 1) = zs[up].imag();
        col += 2;
    }
    Eigen::JacobiSVD<RealMatrix> svd(V);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= 0.0 || sv(0) / sv(n - 1) > 1e8) return {};
    return {true, Z * V.fullPivLu().inverse()};
}

}  // namespace

int main() {
    const Tolerances tol{};

    criterion(1, "double-integrator exact oracle", [&] {
        const auto t0 = Clock::now();
        const GainResult g = synthesize(fixtures::di_single_target());
        const double secs = seconds_since(t0);
        const double err = max_entry_error(g.F, {-2.0, -3.0});
        return std::pair{err <= 1e-9 && secs < 1.0, fmt("max |F - [-2,-3]| = %.3g, %.4f s", err, secs)};
    });

    criterion(2, "Jordan-chain exact oracle", [&] {
        const SurgicalProblem p = fixtures::di_jordan_chain();
        const GainResult g = synthesize(p);
        const double err = max_entry_error(g.F, {-1.0, -2.0});
        const VerificationReport rep = verify_closed_loop(p.system, g.F, p);
        double worst = 0.0;
        for (double x : rep.target_residuals) worst = std::max(worst, x);
        const bool ok = err <= 1e-9 && worst <= 1e-9 && rep.target_residuals.size() == 2;
        return std::pair{ok, fmt("max |F - [-1,-2]| = %.3g, max chain residual = %.3g", err, worst)};
    });

    criterion(3, "conjugate-pair pure placement", [&] {
        const GainResult g = synthesize(fixtures::di_conjugate_pair());
        const double err = max_entry_error(g.F, {-2.0, -2.0});
        // The gain type holds doubles only; also confirm the serialized form carries no imaginary data.
        const bool real = g.F.allFinite() && parse_gain(emit_gain(g.F)) == g.F;
        return std::pair{err <= 1e-9 && real, fmt("max |F - [-2,-2]| = %.3g, real = %s", err, real ? "yes" : "no")};
    });

    SuiteOutcome suite;
    criterion(4, "randomized property suite", [&] {
        suite = run_suite();
        const int counted = suite.instances - suite.flagged;
        const bool ok = suite.errors == 0 && suite.fail_a == 0 && suite.fail_b == 0 && suite.fail_c == 0 &&
                        suite.fail_d == 0 && suite.seconds < 60.0;
        std::string detail = fmt(
            "%d instances, %d counted, %d flagged cond(V0)>1e8, errors %d, failures a/b/c/d = %d/%d/%d/%d, "
            "worst ratio to bound a/b/c = %.3g/%.3g/%.3g, %.2f s",
            suite.instances, counted, suite.flagged, suite.errors, suite.fail_a, suite.fail_b, suite.fail_c,
            suite.fail_d, suite.worst_a, suite.worst_b, suite.worst_c, suite.seconds);
        for (const auto& note : suite.notes) detail += "; " + note;
        return std::pair{ok, detail};
    });

    criterion(5, "oracle equivalence with one-shot full assignment", [&] {
        fixtures::ProblemGenerator gen(0x0c0ffee, {.n_min = 2, .n_max = 8, .m_min = 1, .m_max = 3});
        int compared = 0, skipped = 0, failed = 0;
        double worst_two = 0.0, worst_one = 0.0;
        std::string first_failure;
        while (compared < 100) {
            const SurgicalProblem p = gen.next();
            const OracleGain oracle = one_shot_gain(p, gen);
            if (!oracle.ok) {
                ++skipped;
                continue;
            }
            ++compared;
            const GainResult g = synthesize(p, static_cast<std::uint64_t>(compared));
            const std::vector<Complex> want = p.requested_spectrum();
            const double two = bottleneck_distance(closed_loop_eigenvalues(p.system.A(), p.system.B(), g.F), want);
            const double one = bottleneck_distance(closed_loop_eigenvalues(p.system.A(), p.system.B(), oracle.F), want);
            worst_two = std::max(worst_two, two);
            worst_one = std::max(worst_one, one);
            if (!(two <= 1e-6 && one <= 1e-6)) {
                ++failed;
                if (first_failure.empty()) first_failure = fmt("; first failure: two-stage %.3g, one-shot %.3g", two, one);
            }
        }
        return std::pair{failed == 0, fmt("%d compared, %d skipped (oracle basis singular), %d disagree, worst "
                                          "two-stage %.3g, worst one-shot %.3g%s",
                                          compared, skipped, failed, worst_two, worst_one, first_failure.c_str())};
    });

    criterion(6, "block similarity identity on every suite instance", [&] {
        const bool ok = suite.instances == kSuiteSize && suite.errors == 0 && suite.fail_eq3 == 0;
        return std::pair{ok, fmt("%d checked, %d failures, worst ratio to bound %.3g", suite.instances - suite.flagged -
                                                                                        suite.errors,
                                 suite.fail_eq3, suite.worst_eq3)};
    });

    criterion(7, "defective free eigenvalue, n = 4 single input", [&] {
        fixtures::ProblemGenerator gen(0xdef4);
        RealMatrix A, B;
        do {
            A = gen.gaussian(4, 4);
            B = gen.gaussian(4, 1);
        } while (!check_controllability(SystemPair(A, B), tol));
        const SurgicalProblem p{SystemPair(A, B), {}, std::vector<Complex>(4, Complex(-1, 0)), tol};
        const auto t0 = Clock::now();
        const GainResult g = synthesize(p);
        const double secs = seconds_since(t0);
        const RealMatrix Acl = A + B * g.F;
        // A 4-fold defective eigenvalue is resolved through the mean of its computed cluster.
        const SpectrumComparison cmp = compare_spectrum(Acl, p.requested_spectrum(), tol);
        const double raw = bottleneck_distance(raw_eigenvalues(Acl), p.requested_spectrum());
        const double bound = 1e-6 * (1.0 + norm2(A));
        const bool ok = cmp.max_distance <= bound && secs < 1.0;
        return std::pair{ok, fmt("cluster-mean distance %.3g (bound %.3g), raw eigenvalue spread %.3g, %.4f s",
                                 cmp.max_distance, bound, raw, secs)};
    });

    criterion(8, "inadmissibility detection", [&] {
        // -(A + I) v = [-1, 0] for v = [1, 0]: first component outside range(B).
        const SurgicalProblem p{fixtures::double_integrator(),
                                {{Complex(-2, 0), cvec({1, -2}), std::nullopt},
                                 {Complex(-1, 0), cvec({1, 0}), std::nullopt}},
                                {},
                                tol};
        bool detected = false;
        std::size_t index = 99;
        try {
            (void)compute_input_directions(p);
        } catch (const Error& e) {
            detected = e.kind() == ErrorKind::Inadmissible && e.index().has_value();
            if (detected) index = *e.index();
        }
        const auto dir = std::filesystem::temp_directory_path() / "eigsurg_acceptance_c8";
        std::filesystem::create_directories(dir);
        const std::string file = (dir / "inadmissible.json").string();
        write_file(file, R"({"A": [[0, 1], [0, 0]], "B": [[0], [1]],
  "specified": [{"eigenvalue": [-1, 0], "vector": [[1, 0], [0, 0]], "chain_parent": null}],
  "free_eigenvalues": [[-2, 0]]})");
        std::string a0 = "eigsurg", a1 = "check", a2 = file;
        char* argv[] = {a0.data(), a1.data(), a2.data()};
        std::ostringstream out, err;
        const int code = cli::main(3, argv, out, err);
        std::filesystem::remove_all(dir);
        const bool ok = detected && index == 1 && code == 1;
        return std::pair{ok, fmt("Inadmissible(%zu) raised = %s, check exit code %d", index, detected ? "yes" : "no",
                                 code)};
    });

    criterion(9, "determinism of the property suite", [&] {
        const SuiteOutcome again = run_suite();
        std::size_t differing = 0;
        for (std::size_t k = 0; k < std::min(suite.gains.size(), again.gains.size()); ++k) {
            if (suite.gains[k] != again.gains[k]) ++differing;
        }
        const bool ok = suite.gains.size() == static_cast<std::size_t>(kSuiteSize) &&
                        again.gains.size() == suite.gains.size() && differing == 0;
        return std::pair{ok, fmt("%zu gain files compared, %zu differ", again.gains.size(), differing)};
    });

    std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "OK" : "FAIL", failures);
    return failures == 0 ? 0 : 1;
}
