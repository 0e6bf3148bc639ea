#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtoa::strategy {

/// Queueing-model view of an access strategy.
///
/// A HOL batch of `batch_size` packets contends with its first packet; after
/// k failures it transmits with probability schedule[min(k, cutoff)]. The
/// first `capture_depth` entries are 1 (capture states).
struct AccessStrategy {
    std::uint64_t batch_size = 1;   ///< M
    std::size_t cutoff = 0;         ///< K
    std::size_t capture_depth = 0;  ///< n_C
    std::vector<double> schedule;   ///< q_0 .. q_K

    double q(std::size_t k) const { return schedule[k < cutoff ? k : cutoff]; }
    /// The single non-capture probability q_{n_C}.
    double noncapture_q() const { return schedule[capture_depth]; }

    /// Throws ConfigError if the shape assumed by the analysis is violated.
    void validate() const;

    friend bool operator==(const AccessStrategy&, const AccessStrategy&) = default;
};

/// K = n_C strategy: q_k = 1 below n_C, then q.
AccessStrategy make_strategy(std::uint64_t batch_size, std::size_t capture_depth, double q);

enum class Sensing { kFree, kBased };
enum class Connection { kFree, kBased };
enum class Capture { kFree, kBased };

struct StrategyClass {
    Sensing sensing = Sensing::kFree;
    Connection connection = Connection::kFree;
    Capture capture = Capture::kFree;

    friend bool operator==(const StrategyClass&, const StrategyClass&) = default;
};

std::string describe(const StrategyClass& cls);

/// Number of failures after which the transmit Q value falls to the
/// threshold. nullopt means it never does (Q_th = 0 with alpha < 1).
using CaptureDepth = std::optional<std::size_t>;

CaptureDepth capture_depth(double alpha, double q_threshold, double q0 = 1.0);

/// Literal decay loop: first k with (1 - alpha)^k * q0 <= q_threshold, or
/// nullopt when the value never gets there within max_iter steps (or would
/// only reach zero through floating-point underflow).
CaptureDepth capture_depth_oracle(double alpha, double q_threshold, double q0,
                                  std::size_t max_iter);

AccessStrategy derive_strategy_mtoa_l(std::size_t null_actions, double alpha,
                                      double q_threshold, double q0 = 1.0);

/// Throws ConfigError for an unbounded window (no renewal structure).
AccessStrategy derive_strategy_mtoa_g(std::size_t null_actions,
                                      std::optional<std::uint64_t> reset_window);

StrategyClass classify(const AccessStrategy& strategy);

}  // namespace mtoa::strategy
