#include <cmath>
#include <string>

#include <json.hpp>

#include "eigsurg/model.hpp"

namespace eigsurg {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::Schema, path + ": " + msg);
}

double read_real(const json& j, const std::string& path) {
    if (!j.is_number()) schema_error(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema_error(path, "number is not finite");
    return v;
}

Complex read_complex(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) schema_error(path, "expected a complex scalar [re, im]");
    return {read_real(j[0], path + "[0]"), read_real(j[1], path + "[1]")};
}

RealMatrix read_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) schema_error(path, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    RealMatrix M;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const std::string rpath = path + "[" + std::to_string(i) + "]";
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.empty()) schema_error(rpath, "expected a non-empty row array");
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            M.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            schema_error(rpath, "ragged matrix: expected " + std::to_string(cols) + " entries");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            M(i, k) = read_real(row[static_cast<std::size_t>(k)], rpath + "[" + std::to_string(k) + "]");
        }
    }
    return M;
}

const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(path, std::string("missing required key \"") + key + "\"");
    return *it;
}

}  // namespace

SurgicalProblem parse_problem(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Schema, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_error("$", "expected an object");

    RealMatrix A = read_matrix(require(doc, "A", "$"), "$.A");
    RealMatrix B = read_matrix(require(doc, "B", "$"), "$.B");
    if (A.rows() != A.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "$.A: matrix must be square");
    }
    if (B.rows() != A.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "$.B: row count must equal n = " + std::to_string(A.rows()));
    }
    const auto n = static_cast<std::size_t>(A.rows());

    const json& spec = require(doc, "specified", "$");
    if (!spec.is_array()) schema_error("$.specified", "expected an array");
    std::vector<EigenTarget> targets;
    targets.reserve(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const std::string tpath = "$.specified[" + std::to_string(i) + "]";
        const json& t = spec[i];
        if (!t.is_object()) schema_error(tpath, "expected an object");
        EigenTarget target;
        target.eigenvalue = read_complex(require(t, "eigenvalue", tpath), tpath + ".eigenvalue");
        const json& vec = require(t, "vector", tpath);
        if (!vec.is_array()) schema_error(tpath + ".vector", "expected an array of [re, im]");
        if (vec.size() != n) {
            throw Error(ErrorKind::DimensionMismatch,
                        tpath + ".vector: length " + std::to_string(vec.size()) + " differs from n = " +
                            std::to_string(n),
                        i);
        }
        target.vector.resize(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) {
            target.vector(static_cast<Eigen::Index>(k)) =
                read_complex(vec[k], tpath + ".vector[" + std::to_string(k) + "]");
        }
        const json& parent = require(t, "chain_parent", tpath);
        if (!parent.is_null()) {
            if (!parent.is_number_integer() || parent.get<long long>() < 0) {
                schema_error(tpath + ".chain_parent", "expected null or a non-negative integer index");
            }
            const auto idx = parent.get<unsigned long long>();
            if (idx >= spec.size()) {
                throw Error(ErrorKind::DimensionMismatch, tpath + ".chain_parent: index out of range", i);
            }
            target.chain_parent = static_cast<std::size_t>(idx);
        }
        targets.push_back(std::move(target));
    }

    const json& freej = require(doc, "free_eigenvalues", "$");
    if (!freej.is_array()) schema_error("$.free_eigenvalues", "expected an array of [re, im]");
    std::vector<Complex> free_eigs;
    free_eigs.reserve(freej.size());
    for (std::size_t i = 0; i < freej.size(); ++i) {
        free_eigs.push_back(read_complex(freej[i], "$.free_eigenvalues[" + std::to_string(i) + "]"));
    }

    SurgicalProblem p{SystemPair(std::move(A), std::move(B)), std::move(targets), std::move(free_eigs), Tolerances{}};
    p.check_shapes();
    return p;
}

}  // namespace eigsurg
