#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mtoa::tradeoff {

enum class PointSource { kAnalysis, kSimulation };

struct TradeoffParams {
    double q_noncapture = 0.0;  ///< q_{n_C}
    std::uint64_t batch_size = 1;
    std::size_t capture_depth = 0;
    std::size_t cutoff = 0;

    friend bool operator==(const TradeoffParams&, const TradeoffParams&) = default;
};

struct TradeoffPoint {
    double throughput = 0.0;
    double fairness = 0.0;
    TradeoffParams params;
    PointSource source = PointSource::kAnalysis;
    /// Set when the analysis failed for this cell; such points never enter a frontier.
    std::optional<std::string> error;

    bool ok() const { return !error.has_value(); }
    friend bool operator==(const TradeoffPoint&, const TradeoffPoint&) = default;
};

struct SweepGrid {
    std::vector<double> q_values;
    std::vector<std::uint64_t> m_values;
    std::vector<std::size_t> n_c_values;
    double horizon = 1e7;
    std::size_t n = 100;

    /// 200 log-spaced q in [1e-10, 1e-1], 100 log-spaced integer M in [1, 1e6], n_C in 0..4.
    static SweepGrid defaults(std::size_t n, double horizon);
    void validate() const;
};

/// `count` log-spaced values in [lo, hi] (endpoints included).
std::vector<double> log_space(double lo, double hi, std::size_t count);
/// Log-spaced, rounded to integers, deduplicated, ascending.
std::vector<std::uint64_t> log_space_integers(std::uint64_t lo, std::uint64_t hi, std::size_t count);

/// One analytical point per (n_C, M, q) cell, in that nesting order. Cells
/// whose analysis fails are kept with `error` set.
std::vector<TradeoffPoint> sweep_tradeoff(const SweepGrid& grid, unsigned workers = 1);

/// True if `a` is at least as good on both axes and strictly better on one.
bool dominates(const TradeoffPoint& a, const TradeoffPoint& b);

/// Non-dominated subset of the successful points, sorted by fairness
/// ascending. Exact duplicates on both axes are all kept.
std::vector<TradeoffPoint> pareto_frontier(std::span<const TradeoffPoint> points);

/// Highest-throughput frontier point with fairness >= j_min. Throws
/// ConfigError on an empty frontier and InfeasibleError when none qualifies.
TradeoffPoint max_throughput_under_fairness(std::span<const TradeoffPoint> frontier, double j_min);

/// Largest throughput the frontier reaches at fairness >= j, by linear
/// interpolation between neighbouring frontier points. Used for comparing
/// frontiers on a common fairness axis.
std::optional<double> frontier_throughput_at(std::span<const TradeoffPoint> frontier, double j);

struct MtoaLRecommendation {
    double alpha = 0.9;
    double q_threshold = 0.05;
    std::size_t null_actions = 0;
    std::size_t capture_depth = 2;
    double throughput = 0.0;
    double fairness = 0.0;
};

struct MtoaGRecommendation {
    std::size_t null_actions = 0;
    std::uint64_t reset_window = 1;
    double throughput = 0.0;
    double fairness = 0.0;
};

/// alpha = 0.9, Q_th = 0.05 (two capture states); L maximizes the analytical
/// throughput subject to J_T >= j_min.
MtoaLRecommendation recommend_mtoa_l(std::size_t n, double horizon, double j_min);

inline constexpr std::uint64_t kMaxResetWindow = 1000000;

/// L = n - 1; the window is the largest M <= kMaxResetWindow with J_T >= j_min.
MtoaGRecommendation recommend_mtoa_g(std::size_t n, double horizon, double j_min);

}  // namespace mtoa::tradeoff
