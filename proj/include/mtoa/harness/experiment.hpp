#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtoa/sim/config.hpp"
#include "mtoa/strategy/strategy.hpp"
#include "mtoa/tradeoff/tradeoff.hpp"

namespace mtoa::harness {

enum class Mode { kSimulate, kAnalyze, kSweep, kCompare, kRecommend };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

inline constexpr std::uint64_t kDeskHorizon = 1000000;
inline constexpr std::uint64_t kFullHorizon = 10000000;
inline constexpr std::size_t kDefaultReplications = 5;

struct ExperimentSpec {
    Mode mode = Mode::kSimulate;
    sim::NetworkConfig network;
    /// Explicit strategy (analyze mode); otherwise derived from the scheme.
    std::optional<strategy::AccessStrategy> strategy;
    double q0 = 1.0;
    std::size_t replications = kDefaultReplications;
    std::optional<tradeoff::SweepGrid> grid;
    /// Sweep mode: restrict the grid to one scheme's strategy family.
    std::optional<sim::Scheme> family;
    std::optional<double> j_min;
    unsigned workers = 1;
    std::string output_path;
    std::optional<std::string> summary_path;
};

struct ParseOptions {
    /// Mode from the command line; must agree with a "mode" key if both exist.
    std::optional<Mode> mode;
    /// Default T becomes 10^7 instead of 10^6.
    bool full_scale = false;
};

/// Parses and validates a JSON experiment document. Unknown keys, type
/// mismatches and out-of-range values throw ConfigError naming the key.
ExperimentSpec parse_config(std::string_view text, const ParseOptions& options = {});

/// Sentinel used in report rows for an unbounded window or capture depth.
inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

struct ReportRow {
    std::string scheme;
    std::size_t n = 0;
    std::uint64_t horizon = 0;
    std::optional<std::uint64_t> seed;  ///< empty on aggregate and analysis rows
    std::optional<std::uint64_t> null_actions;
    std::optional<double> alpha;
    std::optional<double> q_th;
    std::optional<std::uint64_t> m_window;   ///< kUnbounded -> "inf"
    std::optional<std::uint64_t> n_capture;  ///< kUnbounded -> "inf"
    std::optional<double> q_noncapture;
    std::optional<double> lambda_out;
    std::optional<double> jain;
    std::string source;  ///< "sim" or "analysis"
    std::optional<double> rel_error;       ///< throughput, compare mode
    std::optional<double> rel_error_jain;  ///< fairness, compare mode
    std::string status = "ok";             ///< "ok" or "error: ..."

    bool ok() const { return status == "ok"; }
    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Fixed header; columns in ReportRow order.
std::string_view csv_header();
std::string to_csv(std::span<const ReportRow> rows);
/// Inverse of to_csv. Throws ConfigError on malformed input.
std::vector<ReportRow> parse_csv(std::string_view text);

struct Comparison {
    std::vector<ReportRow> joined;  ///< simulation rows annotated with relative errors
    std::vector<std::string> diagnostics;
};

/// Joins simulation rows to analysis rows on (scheme, n, T, L, alpha, Q_th,
/// window). Unmatched keys and failed analysis cells go to diagnostics.
Comparison compare_sim_analysis(std::span<const ReportRow> sim_rows,
                                std::span<const ReportRow> analysis_rows);

struct ExperimentResult {
    std::vector<ReportRow> rows;
    std::vector<std::string> diagnostics;
    nlohmann::json summary;
    /// True when an analytical evaluation failed (CLI exit code 3).
    bool numerical_failure = false;
};

/// Runs the experiment without touching the filesystem.
ExperimentResult execute(const ExperimentSpec& spec);

/// execute() plus writing the CSV (and the JSON summary when requested).
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace mtoa::harness
