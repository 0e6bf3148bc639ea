#include "mtoa/strategy/strategy.hpp"

#include <cmath>
#include <string>

#include "mtoa/error.hpp"

namespace mtoa::strategy {

void AccessStrategy::validate() const {
    if (batch_size < 1) throw ConfigError("batch size M must be >= 1");
    if (cutoff < capture_depth) throw ConfigError("cutoff K must be >= capture depth n_C");
    if (schedule.size() != cutoff + 1) throw ConfigError("schedule must hold q_0..q_K");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const double q = schedule[k];
        if (!(q > 0.0 && q <= 1.0)) throw ConfigError("transmission probabilities must lie in (0,1]");
        if (k < capture_depth && q != 1.0) throw ConfigError("capture states must transmit with probability 1");
        if (k > 0 && q > schedule[k - 1]) throw ConfigError("schedule must be non-increasing");
    }
}

AccessStrategy make_strategy(std::uint64_t batch_size, std::size_t capture_depth, double q) {
    AccessStrategy s;
    s.batch_size = batch_size;
    s.cutoff = capture_depth;
    s.capture_depth = capture_depth;
    s.schedule.assign(capture_depth + 1, 1.0);
    s.schedule.back() = q;
    s.validate();
    return s;
}

std::string describe(const StrategyClass& cls) {
    std::string out = cls.sensing == Sensing::kFree ? "sensing-free" : "sensing-based";
    out += cls.connection == Connection::kFree ? ", connection-free" : ", connection-based";
    out += cls.capture == Capture::kFree ? ", capture-free" : ", capture-based";
    return out;
}

namespace {

void check_domain(double alpha, double q_threshold, double q0) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
    if (!(q_threshold >= 0.0)) throw ConfigError("q_th must be >= 0");
    if (!(q0 > 0.0 && q0 <= 1.0)) throw ConfigError("q0 must lie in (0,1]");
}

}  // namespace

CaptureDepth capture_depth(double alpha, double q_threshold, double q0) {
    check_domain(alpha, q_threshold, q0);
    if (q_threshold >= alpha) return 0;
    if (alpha == 1.0) return 1;
    if (q_threshold == 0.0) return std::nullopt;
    if (q0 <= q_threshold) return 0;

    const double decay = 1.0 - alpha;
    auto reached = [&](double k) { return q0 * std::pow(decay, k) <= q_threshold; };
    double k = std::ceil(std::log(q_threshold / q0) / std::log1p(-alpha));
    if (k < 0.0) k = 0.0;
    // The logarithm can land a hair off an integer; settle on the exact crossing.
    while (k > 0.0 && reached(k - 1.0)) k -= 1.0;
    while (!reached(k)) k += 1.0;
    return static_cast<std::size_t>(k);
}

CaptureDepth capture_depth_oracle(double alpha, double q_threshold, double q0,
                                  std::size_t max_iter) {
    check_domain(alpha, q_threshold, q0);
    double value = q0;
    for (std::size_t k = 0; k <= max_iter; ++k) {
        if (value <= q_threshold) {
            // A positive value only hits zero through underflow when alpha < 1.
            if (value == 0.0 && q_threshold == 0.0 && alpha < 1.0) return std::nullopt;
            return k;
        }
        value *= 1.0 - alpha;
    }
    return std::nullopt;
}

AccessStrategy derive_strategy_mtoa_l(std::size_t null_actions, double alpha,
                                      double q_threshold, double q0) {
    if (null_actions < 1) throw ConfigError("L must be >= 1");
    const auto depth = capture_depth(alpha, q_threshold, q0);
    if (!depth) {
        throw ConfigError("strategy monopolizes channel; no steady state with re-contention "
                          "(q_th = 0 with alpha < 1)");
    }
    return make_strategy(1, *depth, 1.0 / (static_cast<double>(null_actions) + 1.0));
}

AccessStrategy derive_strategy_mtoa_g(std::size_t null_actions,
                                      std::optional<std::uint64_t> reset_window) {
    if (null_actions < 1) throw ConfigError("L must be >= 1");
    if (!reset_window) throw ConfigError("unbounded m_window has no renewal structure");
    if (*reset_window < 1) throw ConfigError("m_window must be >= 1");
    return make_strategy(*reset_window, 0, 1.0 / (static_cast<double>(null_actions) + 1.0));
}

StrategyClass classify(const AccessStrategy& strategy) {
    strategy.validate();
    StrategyClass cls;
    cls.connection = strategy.batch_size > 1 ? Connection::kBased : Connection::kFree;
    cls.capture = strategy.capture_depth >= 1 ? Capture::kBased : Capture::kFree;
    return cls;
}

}  // namespace mtoa::strategy
