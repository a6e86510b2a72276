#include "eigsurg/cli.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace eigsurg::cli {
namespace {

using nlohmann::json;

json violations_json(const std::vector<Violation>& violations) {
    json arr = json::array();
    for (const auto& v : violations) {
        arr.push_back({{"condition", std::string(to_string(v.condition))}, {"indices", v.indices}, {"detail", v.detail}});
    }
    return arr;
}

void print_violations_text(std::ostream& out, const std::vector<Violation>& violations) {
    if (violations.empty()) {
        out << "violations: none\n";
        return;
    }
    for (const auto& v : violations) {
        out << "violation " << to_string(v.condition) << " {";
        for (std::size_t k = 0; k < v.indices.size(); ++k) out << (k ? "," : "") << v.indices[k];
        out << "}: " << v.detail << '\n';
    }
}

std::string fmt_complex(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g%+.10gi", z.real(), z.imag());
    return buf;
}

void print_report_text(std::ostream& out, const VerificationReport& r) {
    out << "eigenvalues (target -> achieved, distance):\n";
    for (const auto& p : r.eigenvalue_pairs) {
        out << "  " << fmt_complex(p.target) << " -> " << fmt_complex(p.achieved) << "  " << p.distance;
        if (p.cluster_size > 1) out << "  (cluster of " << p.cluster_size << ")";
        out << '\n';
    }
    out << "max pair distance: " << r.max_pair_distance << '\n';
    for (std::size_t i = 0; i < r.target_residuals.size(); ++i) {
        out << "target " << i << " residual: " << r.target_residuals[i] << '\n';
    }
    out << "residual bound: " << r.residual_bound << '\n';
    if (r.f1_annihilation) out << "||F1 V01||: " << *r.f1_annihilation << '\n';
    if (r.cond_V0) out << "cond(V0): " << *r.cond_V0 << '\n';
    out << "||F||_F: " << r.gain_norm << '\n';
    out << "passed: " << (r.passed ? "yes" : "no") << '\n';
}

void apply_overrides(const Config& c, Tolerances& tol) {
    if (c.tol_rank) tol.rank_rel = *c.tol_rank;
    if (c.tol_residual) tol.residual_abs = *c.tol_residual;
    if (c.tol_match) tol.match_abs = *c.tol_match;
    tol.validate();
}

SurgicalProblem load_problem(const Config& c) {
    SurgicalProblem p = parse_problem(read_file(c.problem_path));
    apply_overrides(c, p.tolerances);
    return p;
}

// Full admissibility sweep for `check`: structure, controllability, then
// feasibility of every input direction.
std::vector<Violation> admissibility(const SurgicalProblem& p) {
    std::vector<Violation> violations = validate_structure(p);
    if (!check_controllability(p.system, p.tolerances)) {
        violations.push_back({Condition::Controllability, {}, "(A, B) is not controllable"});
    }
    if (violations.empty()) {
        try {
            (void)compute_input_directions(p);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Inadmissible) throw;
            std::vector<std::size_t> idx;
            if (e.index()) idx.push_back(*e.index());
            violations.push_back({Condition::Admissibility, idx, e.what()});
        }
    }
    return violations;
}

int run_check(const Config& c, std::ostream& out) {
    const SurgicalProblem p = load_problem(c);
    const std::vector<Violation> violations = admissibility(p);
    if (c.format == Format::Json) {
        json doc{{"admissible", violations.empty()}, {"violations", violations_json(violations)}};
        out << doc.dump(2) << '\n';
    } else {
        print_violations_text(out, violations);
    }
    if (violations.empty()) {
        out << "OK check: problem is admissible\n";
        return kOk;
    }
    out << "FAIL check: " << violations.size() << " violation(s)";
    for (const auto& v : violations) out << ' ' << to_string(v.condition);
    out << '\n';
    return kFailed;
}

int run_synth(const Config& c, std::ostream& out) {
    const SurgicalProblem p = load_problem(c);
    GainResult result;
    try {
        result = synthesize(p, c.seed);
    } catch (const ProblemInvalidError& e) {
        if (c.format == Format::Json) {
            out << json{{"violations", violations_json(e.violations())}}.dump(2) << '\n';
        } else {
            print_violations_text(out, e.violations());
        }
        out << "FAIL synth: " << e.what() << '\n';
        return kFailed;
    }

    const std::string gain = emit_gain(result.F);
    const json report = report_to_json(result.report, c.seed);
    if (c.output_path) write_file(*c.output_path, gain);
    if (c.report_path) write_file(*c.report_path, report.dump(2) + "\n");

    if (c.format == Format::Json) {
        json doc = json::object();
        if (!c.output_path) doc["F"] = json::parse(gain).at("F");
        if (!c.report_path) doc["report"] = report;
        if (!doc.empty()) out << doc.dump(2) << '\n';
    } else {
        if (!c.output_path) out << gain;
        print_report_text(out, result.report);
    }
    if (result.report.passed) {
        out << "OK synth: gain verified (max eigenvalue distance " << result.report.max_pair_distance << ")\n";
        return kOk;
    }
    out << "FAIL synth: closed-loop verification failed\n";
    return kFailed;
}

int run_verify(const Config& c, std::ostream& out) {
    if (!c.gain_path) throw Error(ErrorKind::Schema, "verify requires --gain");
    const SurgicalProblem p = load_problem(c);
    const RealMatrix F = parse_gain(read_file(*c.gain_path));
    const VerificationReport report = verify_closed_loop(p.system, F, p);
    const json doc = report_to_json(report, c.seed);
    if (c.report_path) write_file(*c.report_path, doc.dump(2) + "\n");
    if (c.format == Format::Json) {
        if (!c.report_path) out << doc.dump(2) << '\n';
    } else {
        print_report_text(out, report);
    }
    if (report.passed) {
        out << "OK verify: closed loop matches the requested eigenstructure\n";
        return kOk;
    }
    out << "FAIL verify: closed loop does not match the requested eigenstructure\n";
    return kFailed;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Schema:
        case ErrorKind::Io:
        case ErrorKind::DimensionMismatch:
            return kIoOrSchema;
        case ErrorKind::Inadmissible:
        case ErrorKind::ProblemInvalid:
            return kFailed;
        default:
            return kNumerical;
    }
}

}  // namespace

int run(const Config& config, std::ostream& out, std::ostream& err) {
    try {
        switch (config.command) {
            case Command::Check: return run_check(config, out);
            case Command::Synth: return run_synth(config, out);
            case Command::Verify: return run_verify(config, out);
        }
        return kNumerical;
    } catch (const Error& e) {
        err << to_string(e.kind());
        if (!e.stage().empty()) err << " [" << e.stage() << "]";
        err << ": " << e.what() << '\n';
        out << "FAIL " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        out << "FAIL internal: " << e.what() << '\n';
        return kNumerical;
    }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Surgical eigenstructure assignment by real state feedback"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Config cfg;
    std::string format = "json";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("problem", cfg.problem_path, "Problem file (JSON)")->required();
        sub->add_option("--tol-rank", cfg.tol_rank, "Relative singular-value cutoff for rank decisions");
        sub->add_option("--tol-residual", cfg.tol_residual, "Absolute residual bound for verification");
        sub->add_option("--tol-match", cfg.tol_match, "Eigenvalue pairing distance bound");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    };

    CLI::App* check = app.add_subcommand("check", "Validate a problem without synthesizing a gain");
    add_common(check);

    CLI::App* synth = app.add_subcommand("synth", "Synthesize and verify a feedback gain");
    add_common(synth);
    synth->add_option("-o,--output", cfg.output_path, "Gain output file");
    synth->add_option("--report", cfg.report_path, "Verification report output file");
    synth->add_option("--seed", cfg.seed, "Seed for the randomized eigenvector retries");

    CLI::App* verify = app.add_subcommand("verify", "Verify an existing gain against a problem");
    add_common(verify);
    verify->add_option("--gain", cfg.gain_path, "Gain file to verify")->required();
    verify->add_option("--report", cfg.report_path, "Verification report output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        std::ostringstream help;
        app.exit(e, help, err);
        out << help.str() << "OK " << e.get_name() << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        out << "FAIL usage: " << e.what() << '\n';
        return kIoOrSchema;
    }

    if (*check) cfg.command = Command::Check;
    if (*synth) cfg.command = Command::Synth;
    if (*verify) cfg.command = Command::Verify;
    cfg.format = format == "text" ? Format::Text : Format::Json;
    return run(cfg, out, err);
}

}  // namespace eigsurg::cli
