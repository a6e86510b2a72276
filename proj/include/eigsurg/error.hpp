#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eigsurg {

enum class ErrorKind {
    Kernel,              // decomposition did not converge
    RankDeficient,
    Singular,
    DimensionMismatch,
    Inadmissible,        // c_i outside range(B)
    PairingMismatch,
    NotReal,
    Schema,
    Io,
    InvarianceViolated,
    NotControllable,
    SelectionFailed,
    ProblemInvalid,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(what), kind_(kind), index_(index) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Offending target / column index, when the failure is attributable to one.
    std::optional<std::size_t> index() const noexcept { return index_; }

    // Pipeline stage that raised the error ("stage0", "decompose", ...). Empty
    // when thrown outside synthesize().
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    ErrorKind kind_;
    std::optional<std::size_t> index_;
    std::string stage_;
};

}  // namespace eigsurg
