#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eigsurg/cli.hpp"

namespace eigsurg {

using nlohmann::json;

namespace {

std::string format17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorKind::Schema, "report: expected complex scalar [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

std::optional<double> optional_number(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

}  // namespace

std::string emit_gain(const RealMatrix& F) {
    std::string out = "{\n  \"F\": [\n";
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
        out += "    [";
        for (Eigen::Index j = 0; j < F.cols(); ++j) {
            if (!std::isfinite(F(i, j))) throw Error(ErrorKind::Io, "gain has non-finite entries");
            if (j) out += ", ";
            out += format17(F(i, j));
        }
        out += (i + 1 < F.rows()) ? "],\n" : "]\n";
    }
    out += "  ]\n}\n";
    return out;
}

RealMatrix parse_gain(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Schema, std::string("gain file: malformed JSON: ") + e.what());
    }
    const auto it = doc.is_object() ? doc.find("F") : doc.end();
    if (it == doc.end() || !it->is_array() || it->empty()) {
        throw Error(ErrorKind::Schema, "gain file: expected {\"F\": [[...], ...]}");
    }
    const auto rows = static_cast<Eigen::Index>(it->size());
    const json& first = (*it)[0];
    if (!first.is_array() || first.empty()) throw Error(ErrorKind::Schema, "gain file: $.F[0] must be a non-empty row");
    const auto cols = static_cast<Eigen::Index>(first.size());
    RealMatrix F(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = (*it)[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorKind::Schema, "gain file: $.F[" + std::to_string(i) + "] has the wrong length");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            const json& v = row[static_cast<std::size_t>(j)];
            if (!v.is_number()) {
                throw Error(ErrorKind::Schema,
                            "gain file: $.F[" + std::to_string(i) + "][" + std::to_string(j) + "] is not a number");
            }
            F(i, j) = v.get<double>();
        }
    }
    return F;
}

json report_to_json(const VerificationReport& report, std::uint64_t seed) {
    json pairs = json::array();
    for (const auto& p : report.eigenvalue_pairs) {
        pairs.push_back({{"target", complex_json(p.target)},
                         {"achieved", complex_json(p.achieved)},
                         {"distance", p.distance},
                         {"cluster_size", p.cluster_size}});
    }
    json j;
    j["version"] = std::string(kVersion);
    j["seed"] = seed;
    j["passed"] = report.passed;
    j["max_pair_distance"] = report.max_pair_distance;
    j["eigenvalue_pairs"] = std::move(pairs);
    j["target_residuals"] = report.target_residuals;
    j["residual_bound"] = report.residual_bound;
    j["f1_annihilation"] = report.f1_annihilation ? json(*report.f1_annihilation) : json(nullptr);
    j["cond_V0"] = report.cond_V0 ? json(*report.cond_V0) : json(nullptr);
    j["gain_norm"] = report.gain_norm;
    return j;
}

VerificationReport report_from_json(const json& j) {
    try {
        VerificationReport r;
        for (const auto& p : j.at("eigenvalue_pairs")) {
            r.eigenvalue_pairs.push_back({complex_from(p.at("target")), complex_from(p.at("achieved")),
                                          p.at("distance").get<double>(), p.at("cluster_size").get<std::size_t>()});
        }
        r.max_pair_distance = j.at("max_pair_distance").get<double>();
        r.target_residuals = j.at("target_residuals").get<std::vector<double>>();
        r.residual_bound = j.at("residual_bound").get<double>();
        r.f1_annihilation = optional_number(j, "f1_annihilation");
        r.cond_V0 = optional_number(j, "cond_V0");
        r.gain_norm = j.at("gain_norm").get<double>();
        r.passed = j.at("passed").get<bool>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("report: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace eigsurg
