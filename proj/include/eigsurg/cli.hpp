#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "eigsurg/synthesis.hpp"
#include "eigsurg/verify.hpp"

namespace eigsurg {

inline constexpr std::string_view kVersion = "eigsurg 0.1.0";

// Gain file: {"F": [[...], ...]} with 17 significant digits per entry, so
// parse_gain(emit_gain(F)) == F bit for bit.
std::string emit_gain(const RealMatrix& F);
RealMatrix parse_gain(std::string_view text);

nlohmann::json report_to_json(const VerificationReport& report, std::uint64_t seed);
VerificationReport report_from_json(const nlohmann::json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

namespace cli {

enum class Command { Check, Synth, Verify };
enum class Format { Json, Text };

struct Config {
    Command command = Command::Check;
    std::string problem_path;
    std::optional<std::string> gain_path;    // verify input
    std::optional<std::string> output_path;  // synth gain output
    std::optional<std::string> report_path;
    std::uint64_t seed = 0;
    std::optional<double> tol_rank;
    std::optional<double> tol_residual;
    std::optional<double> tol_match;
    Format format = Format::Json;
};

enum ExitCode : int {
    kOk = 0,
    kFailed = 1,     // inadmissible problem or failed verification
    kIoOrSchema = 2,
    kNumerical = 3,
};

/// Executes one command. Always ends `out` with a single status line starting
/// with "OK" or "FAIL".
int run(const Config& config, std::ostream& out, std::ostream& err);

/// argv front end over run().
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace eigsurg
