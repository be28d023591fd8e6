#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: config parsing, commands and verify-all.
 *
 * Commands: support | density | spikes | simulate | separation | verify-all.
 * Exit codes: 0 success, 1 invalid input, 2 convergence or linear algebra
 * failure, 3 failed verification.
 */

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ipn/io.hpp"

namespace ipn {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitNumerical = 2, kExitVerification = 3 };

struct OutputSpec {
    std::string path = "-";       ///< "-" writes to the output stream
    std::string format = "json";  ///< json | csv (csv for density only)
    bool header = false;
};

struct RunConfig {
    std::string command;
    ModelParams model;
    std::optional<SpikeSpec> spikes;
    std::optional<SimConfig> sim;
    OutputSpec output;
    bool timestamp = true;

    std::size_t density_points = 200;
    std::optional<Interval> gap;        ///< separation gap; defaults to the middle of the first support gap
    double epsilon = 0.3;               ///< inclusion tolerance
    std::size_t spike_n = 1000;         ///< matrix size for spike ranks when there is no sim section

    /// Throws ValidationError. Sub-configs are validated before any computation.
    void validate() const;
};

/// Parses a config document; keys: command, model, spikes, sim, density, separation, inclusion, output.
RunConfig config_from_json(const json& j);

struct CheckResult {
    std::string name;
    std::string status;  ///< pass | fail | skipped
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    [[nodiscard]] bool passed() const;
};

/// Requires a sim section.
VerifyReport verify_all(const RunConfig& cfg);
json to_json(const VerifyReport& r);

/// Middle tenth of the first gap between support intervals, if any.
std::optional<Interval> default_separation_gap(const SupportResult& s);

/// Entry point shared by the executable and the tests; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ipn
