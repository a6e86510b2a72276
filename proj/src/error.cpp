#include "eigsurg/error.hpp"

namespace eigsurg {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Kernel: return "KernelError";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::Inadmissible: return "Inadmissible";
        case ErrorKind::PairingMismatch: return "PairingMismatch";
        case ErrorKind::NotReal: return "NotReal";
        case ErrorKind::Schema: return "SchemaError";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::InvarianceViolated: return "InvarianceViolated";
        case ErrorKind::NotControllable: return "NotControllable";
        case ErrorKind::SelectionFailed: return "SelectionFailed";
        case ErrorKind::ProblemInvalid: return "ProblemInvalid";
    }
    return "Unknown";
}

}  // namespace eigsurg
