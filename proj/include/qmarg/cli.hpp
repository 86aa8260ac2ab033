// cli.hpp
// Command layer behind the qmarg executable. Every command returns its
// report as JSON plus an exit code, so tests can drive it in-process.
//
// Exit codes: 0 success / UNIQUE, 1 usage error, 2 negative finding
// (NON_UNIQUE, DEGENERATE, rejected input), 3 INCONCLUSIVE.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmarg/tensor.hpp"

namespace qmarg::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kStateSchema = "qmarg.state/1";
inline constexpr const char* kReportSchema = "qmarg.report/1";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNegative = 2, kExitInconclusive = 3 };

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------- serialization

json state_to_json(const AmplitudeTensor& state);
// Throws UsageError on a wrong schema tag, bad signature or non-unit norm.
AmplitudeTensor state_from_json(const json& j);
AmplitudeTensor load_state(const std::string& path);

json matrix_to_json(const Eigen::MatrixXcd& m);

// "01,02,12" (single-digit parties) or "0:1,0:2" (explicit separators).
// Throws UsageError on malformed groups or out-of-range parties.
std::vector<std::vector<int>> parse_subsets(const std::string& text, int parties);
std::string format_subsets(const std::vector<std::vector<int>>& subsets);

// "a:b" inclusive, or a single value.
std::pair<int, int> parse_range(const std::string& text);
std::vector<int> parse_dims(const std::string& text);

// ---------------------------------------------------------------- commands

struct RunConfig {
    std::string command;
    std::optional<int> n;
    std::optional<int> d;
    std::optional<int> m;
    std::string dims;
    std::string subsets;
    std::string state_path;
    std::string d_range;
    std::string n_range;
    int trials = 20;
    std::uint64_t seed = 1;
    std::optional<double> epsilon;  // default: half the admissible maximum
    bool uniform = false;           // classical: uniform p instead of Dirichlet
    std::string mode;
    std::string format = "json";
    std::string out;
    double tol_rank = 1e-8;
    double tol_converge = 1e-9;
    double tol_distinct = 1e-4;
    int max_iter = 5000;
    int restarts = 8;
};

struct CommandResult {
    json report;  // full document; timings live under "timing"
    std::string csv;  // tabular rendering when the command has one
    int exit_code = kExitOk;
};

CommandResult cmd_sample(const RunConfig& cfg);
CommandResult cmd_check(const RunConfig& cfg);
CommandResult cmd_survey(const RunConfig& cfg);
CommandResult cmd_bounds(const RunConfig& cfg);
CommandResult cmd_classical(const RunConfig& cfg);
CommandResult cmd_reproduce(const RunConfig& cfg);

// Dispatch on cfg.command.
CommandResult execute(const RunConfig& cfg);

// Report with the "timing" member removed.
json strip_timing(const json& report);

// Parse arguments, run, write output; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace qmarg::cli
