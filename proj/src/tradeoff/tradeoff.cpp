#include "mtoa/tradeoff/tradeoff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <tuple>

#include "mtoa/analysis/queueing.hpp"
#include "mtoa/error.hpp"
#include "mtoa/strategy/strategy.hpp"

namespace mtoa::tradeoff {

std::vector<double> log_space(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi >= lo)) throw ConfigError("log_space needs 0 < lo <= hi");
    std::vector<double> out;
    if (count == 0) return out;
    if (count == 1) return {lo};
    out.reserve(count);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(std::pow(10.0, a + (b - a) * t));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<std::uint64_t> log_space_integers(std::uint64_t lo, std::uint64_t hi, std::size_t count) {
    if (lo < 1 || hi < lo) throw ConfigError("log_space_integers needs 1 <= lo <= hi");
    std::vector<std::uint64_t> out;
    for (double v : log_space(static_cast<double>(lo), static_cast<double>(hi), count)) {
        out.push_back(std::clamp(static_cast<std::uint64_t>(std::llround(v)), lo, hi));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SweepGrid SweepGrid::defaults(std::size_t n, double horizon) {
    SweepGrid g;
    g.q_values = log_space(1e-10, 1e-1, 200);
    g.m_values = log_space_integers(1, 1000000, 100);
    g.n_c_values = {0, 1, 2, 3, 4};
    g.horizon = horizon;
    g.n = n;
    return g;
}

void SweepGrid::validate() const {
    if (n < 1) throw ConfigError("grid n must be >= 1");
    if (!(horizon >= 1.0)) throw ConfigError("grid T must be >= 1");
    for (double q : q_values) {
        if (!(q > 0.0 && q <= 1.0)) throw ConfigError("grid q values must lie in (0,1]");
    }
    for (auto m : m_values) {
        if (m < 1) throw ConfigError("grid M values must be >= 1");
    }
}

namespace {

TradeoffPoint evaluate_cell(const TradeoffParams& params, std::size_t n, double horizon) {
    TradeoffPoint point;
    point.params = params;
    try {
        const auto s = strategy::make_strategy(params.batch_size, params.capture_depth, params.q_noncapture);
        const auto e = analysis::evaluate(s, n, horizon);
        point.throughput = e.throughput;
        // The Jain index is bounded below by 1/n; the approximation is not.
        point.fairness = std::max(e.fairness, 1.0 / static_cast<double>(n));
    } catch (const Error& err) {
        point.error = err.what();
    }
    return point;
}

}  // namespace

std::vector<TradeoffPoint> sweep_tradeoff(const SweepGrid& grid, unsigned workers) {
    grid.validate();
    std::vector<TradeoffParams> cells;
    cells.reserve(grid.n_c_values.size() * grid.m_values.size() * grid.q_values.size());
    for (auto nc : grid.n_c_values) {
        for (auto m : grid.m_values) {
            for (double q : grid.q_values) cells.push_back({q, m, nc, nc});
        }
    }
    std::vector<TradeoffPoint> out(cells.size());
    const unsigned pool = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cells.size())));
    if (pool <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) out[i] = evaluate_cell(cells[i], grid.n, grid.horizon);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned w = 0; w < pool; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < cells.size(); i = next++) {
                out[i] = evaluate_cell(cells[i], grid.n, grid.horizon);
            }
        });
    }
    for (auto& t : threads) t.join();
    return out;
}

bool dominates(const TradeoffPoint& a, const TradeoffPoint& b) {
    const bool no_worse = a.throughput >= b.throughput && a.fairness >= b.fairness;
    const bool better = a.throughput > b.throughput || a.fairness > b.fairness;
    return no_worse && better;
}

namespace {

auto order_key(const TradeoffPoint& p) {
    return std::make_tuple(p.fairness, -p.throughput, p.params.capture_depth, p.params.cutoff,
                           p.params.batch_size, p.params.q_noncapture, p.source);
}

}  // namespace

std::vector<TradeoffPoint> pareto_frontier(std::span<const TradeoffPoint> points) {
    std::vector<TradeoffPoint> pool;
    for (const auto& p : points) {
        if (p.ok() && std::isfinite(p.throughput) && std::isfinite(p.fairness)) pool.push_back(p);
    }
    // Descending fairness; within a fairness level the best throughput first.
    std::sort(pool.begin(), pool.end(), [](const TradeoffPoint& a, const TradeoffPoint& b) {
        if (a.fairness != b.fairness) return a.fairness > b.fairness;
        if (a.throughput != b.throughput) return a.throughput > b.throughput;
        return order_key(a) < order_key(b);
    });

    std::vector<TradeoffPoint> frontier;
    double best_above = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size();) {
        std::size_t j = i;
        while (j < pool.size() && pool[j].fairness == pool[i].fairness) ++j;
        const double top = pool[i].throughput;
        if (top > best_above) {
            for (std::size_t k = i; k < j && pool[k].throughput == top; ++k) frontier.push_back(pool[k]);
            best_above = top;
        }
        i = j;
    }
    std::sort(frontier.begin(), frontier.end(),
              [](const TradeoffPoint& a, const TradeoffPoint& b) { return order_key(a) < order_key(b); });
    return frontier;
}

TradeoffPoint max_throughput_under_fairness(std::span<const TradeoffPoint> frontier, double j_min) {
    if (frontier.empty()) throw ConfigError("frontier is empty");
    const TradeoffPoint* best = nullptr;
    for (const auto& p : frontier) {
        if (!p.ok() || p.fairness < j_min) continue;
        if (best == nullptr || p.throughput > best->throughput) best = &p;
    }
    if (best == nullptr) throw InfeasibleError("fairness floor infeasible: no point reaches J_T >= " + std::to_string(j_min));
    return *best;
}

std::optional<double> frontier_throughput_at(std::span<const TradeoffPoint> frontier, double j) {
    if (frontier.empty() || j > frontier.back().fairness) return std::nullopt;
    if (j <= frontier.front().fairness) return frontier.front().throughput;
    for (std::size_t i = 1; i < frontier.size(); ++i) {
        const auto& lo = frontier[i - 1];
        const auto& hi = frontier[i];
        if (j <= hi.fairness) {
            if (hi.fairness == lo.fairness) return hi.throughput;
            const double t = (j - lo.fairness) / (hi.fairness - lo.fairness);
            return lo.throughput + t * (hi.throughput - lo.throughput);
        }
    }
    return frontier.back().throughput;
}

namespace {

analysis::Evaluation evaluate_l(std::size_t n, double horizon, std::uint64_t null_actions) {
    const auto s = strategy::make_strategy(1, 2, 1.0 / (static_cast<double>(null_actions) + 1.0));
    return analysis::evaluate(s, n, horizon);
}

analysis::Evaluation evaluate_g(std::size_t n, double horizon, std::uint64_t window) {
    const auto s = strategy::make_strategy(window, 0, 1.0 / static_cast<double>(n));
    return analysis::evaluate(s, n, horizon);
}

void check_recommend_inputs(std::size_t n, double horizon, double j_min) {
    if (n < 2) throw ConfigError("n must be >= 2");
    if (!(horizon >= 1.0)) throw ConfigError("T must be >= 1");
    if (!(j_min >= 0.0 && j_min <= 1.0)) throw ConfigError("j_min must lie in [0,1]");
}

// Largest x in [lo, hi] with ok(x), given ok(lo) and monotone ok.
template <class Pred>
std::uint64_t last_true(std::uint64_t lo, std::uint64_t hi, Pred ok) {
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo + 1) / 2;
        if (ok(mid)) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

}  // namespace

MtoaLRecommendation recommend_mtoa_l(std::size_t n, double horizon, double j_min) {
    check_recommend_inputs(n, horizon, j_min);
    MtoaLRecommendation rec;
    // Q_th = 0.05 with alpha = 0.9 gives exactly two capture states.
    const auto depth = strategy::capture_depth(rec.alpha, rec.q_threshold);
    if (!depth || *depth != 2) throw InternalError("MTOA-L defaults must give two capture states");

    // Scan L on the same range as the q grid, then refine towards the next
    // infeasible grid value by bisection.
    const auto grid = log_space_integers(1, 10000000000ULL, 200);
    auto feasible = [&](std::uint64_t l) { return evaluate_l(n, horizon, l).fairness >= j_min; };
    std::optional<std::size_t> best;
    double best_throughput = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto e = evaluate_l(n, horizon, grid[i]);
        if (e.fairness >= j_min && e.throughput > best_throughput) {
            best = i;
            best_throughput = e.throughput;
        }
    }
    if (!best) throw InfeasibleError("fairness floor infeasible for MTOA-L");
    std::uint64_t l = grid[*best];
    if (*best + 1 < grid.size() && !feasible(grid[*best + 1])) {
        const auto refined = last_true(l, grid[*best + 1] - 1, feasible);
        if (evaluate_l(n, horizon, refined).throughput > best_throughput) l = refined;
    }
    const auto e = evaluate_l(n, horizon, l);
    rec.null_actions = static_cast<std::size_t>(l);
    rec.capture_depth = *depth;
    rec.throughput = e.throughput;
    rec.fairness = e.fairness;
    return rec;
}

MtoaGRecommendation recommend_mtoa_g(std::size_t n, double horizon, double j_min) {
    check_recommend_inputs(n, horizon, j_min);
    auto feasible = [&](std::uint64_t m) { return evaluate_g(n, horizon, m).fairness >= j_min; };
    if (!feasible(1)) throw InfeasibleError("fairness floor infeasible for MTOA-G");
    const auto window = last_true(1, kMaxResetWindow, feasible);
    const auto e = evaluate_g(n, horizon, window);
    MtoaGRecommendation rec;
    rec.null_actions = n - 1;
    rec.reset_window = window;
    rec.throughput = e.throughput;
    rec.fairness = e.fairness;
    return rec;
}

}  // namespace mtoa::tradeoff
