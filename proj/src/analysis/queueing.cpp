#include "mtoa/analysis/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtoa/error.hpp"

namespace mtoa::analysis {

namespace {

// Below this q~ the n_C >= 1 throughput is replaced by its q~ -> 0 limit.
constexpr double kLimitThreshold = 1e-14;

struct Probabilities {
    double log_pc = 0.0;
    double p_c = 1.0;
    double one_minus_pc = 0.0;
    double log_capture_factor = 0.0;  // log (1 - p_C)^{n_C}
    double p_nc = 1.0;
    double beta_nc = 1.0;
};

// p_C, p_nc and beta_nc as functions of q~. Ratios against (1 - p_C)^{n_C}
// are evaluated in log space so tiny q~ neither underflows nor yields 0/0.
Probabilities probabilities_at(double q_tilde, std::size_t n, std::size_t capture,
                               std::uint64_t batch_size) {
    Probabilities pr;
    if (n == 1) {
        // A lone node never meets contention.
        pr.log_capture_factor = capture == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
        return pr;
    }
    const double others = static_cast<double>(n - 1);
    pr.log_pc = others * std::log1p(-q_tilde);
    pr.p_c = std::exp(pr.log_pc);
    pr.one_minus_pc = -std::expm1(pr.log_pc);

    const double m_minus_1 = static_cast<double>(batch_size - 1);
    if (capture == 0) {
        pr.log_capture_factor = 0.0;
        pr.p_nc = pr.p_c;
        pr.beta_nc = 1.0 / (1.0 + others * m_minus_1 * pr.p_nc * q_tilde);
        return pr;
    }

    pr.log_capture_factor = static_cast<double>(capture) * std::log(pr.one_minus_pc);
    // (n-1) q~ / (1 - p_C)^{n_C}
    const double contention = std::exp(std::log(others * q_tilde) - pr.log_capture_factor);
    // (n-1) q~ (1 - (1-p_C)^{n_C}) / (1-p_C)^{n_C}
    const double correction = contention * -std::expm1(pr.log_capture_factor);
    pr.p_nc = pr.p_c / (1.0 + correction);
    pr.beta_nc = 1.0 / (1.0 + m_minus_1 * pr.p_nc * contention);
    return pr;
}

// Harmonic-form average of q_{n_C}..q_K for a given p_nc.
double harmonic_q(const AccessStrategy& s, double p_nc) {
    const std::size_t capture = s.capture_depth;
    const std::size_t cutoff = s.cutoff;
    double denom = std::pow(1.0 - p_nc, static_cast<double>(cutoff - capture)) / s.schedule[cutoff];
    for (std::size_t k = capture; k < cutoff; ++k) {
        denom += p_nc * std::pow(1.0 - p_nc, static_cast<double>(k - capture)) / s.schedule[k];
    }
    return 1.0 / denom;
}

FixedPoint make_fixed_point(const AccessStrategy& s, std::size_t n, double q_tilde) {
    const auto pr = probabilities_at(q_tilde, n, s.capture_depth, s.batch_size);
    FixedPoint fp;
    fp.beta_c = 1.0;
    fp.beta_nc = pr.beta_nc;
    fp.p_c = pr.p_c;
    fp.p_nc = pr.p_nc;
    fp.q_tilde = q_tilde;
    fp.n = n;
    return fp;
}

double relative_gap(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
    return std::abs(a - b) / scale;
}

FixedPoint iterate_from(const AccessStrategy& s, std::size_t n, double start,
                        const SolverOptions& opt) {
    double q = start;
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        const auto pr = probabilities_at(q, n, s.capture_depth, s.batch_size);
        const double next = harmonic_q(s, pr.p_nc);
        if (!std::isfinite(next) || next <= 0.0) {
            throw NumericalError("fixed point left the probability domain", residual);
        }
        residual = relative_gap(next, q);
        if (residual < opt.tolerance) {
            auto fp = make_fixed_point(s, n, next);
            fp.iterations = it;
            fp.residual = fixed_point_residual(fp, s);
            return fp;
        }
        q = (1.0 - opt.damping) * q + opt.damping * next;
    }
    throw NumericalError("fixed point did not converge within " +
                             std::to_string(opt.max_iterations) + " iterations",
                         residual);
}

void check_inputs(const AccessStrategy& s, std::size_t n) {
    s.validate();
    if (n < 1) throw ConfigError("n must be >= 1");
}

}  // namespace

FixedPoint solve_fixed_point(const AccessStrategy& strategy, std::size_t n,
                             const SolverOptions& options) {
    check_inputs(strategy, n);
    if (strategy.cutoff == strategy.capture_depth) {
        auto fp = make_fixed_point(strategy, n, strategy.schedule[strategy.cutoff]);
        fp.residual = fixed_point_residual(fp, strategy);
        return fp;
    }
    auto from_tail = iterate_from(strategy, n, strategy.schedule[strategy.cutoff], options);
    auto from_head = iterate_from(strategy, n, strategy.noncapture_q(), options);
    if (relative_gap(from_tail.q_tilde, from_head.q_tilde) > 1e-8) {
        throw NumericalError("fixed point: starts from q_K and q_{n_C} disagree",
                             relative_gap(from_tail.q_tilde, from_head.q_tilde));
    }
    return from_tail;
}

double fixed_point_residual(const FixedPoint& fp, const AccessStrategy& s) {
    const auto pr = probabilities_at(fp.q_tilde, fp.n, s.capture_depth, s.batch_size);
    double worst = relative_gap(pr.p_c, fp.p_c);
    worst = std::max(worst, relative_gap(pr.p_nc, fp.p_nc));
    worst = std::max(worst, relative_gap(pr.beta_nc, fp.beta_nc));
    worst = std::max(worst, relative_gap(harmonic_q(s, fp.p_nc), fp.q_tilde));
    worst = std::max(worst, relative_gap(fp.beta_c, 1.0));
    return worst;
}

StateDistribution limiting_probabilities(const FixedPoint& fp, const AccessStrategy& s) {
    s.validate();
    const std::size_t K = s.cutoff;
    const double M = static_cast<double>(s.batch_size);
    StateDistribution d;
    d.pi.assign(K + 2, 0.0);
    d.tau.assign(K + 2, 0.0);

    const double beta0 = fp.beta(0, s);
    const double q0 = s.schedule[0];
    if (K == 0) {
        // B_0 is also the absorbing stage: every non-success returns to it
        // and it self-loops until its first packet gets through.
        const double p = fp.p(0, s);
        const double leave_t = 1.0 - beta0 * q0 * p;
        d.pi[0] = p / (p + leave_t);
        d.pi[1] = d.pi[0] * leave_t / p;
    } else {
        std::vector<double> survive(K + 1, 1.0);  // prod_{l<k} (1 - p^(l))
        for (std::size_t k = 1; k <= K; ++k) survive[k] = survive[k - 1] * (1.0 - fp.p(k - 1, s));
        const double pK = fp.p(K, s);
        double denom = 2.0 - beta0 * q0 + survive[K] / pK;
        for (std::size_t k = 1; k + 1 <= K; ++k) denom += survive[k];
        const double pi_t = 1.0 / denom;
        d.pi[0] = pi_t;
        d.pi[1] = (1.0 - beta0 * q0) * pi_t;
        for (std::size_t k = 1; k < K; ++k) d.pi[1 + k] = pi_t * survive[k];
        d.pi[1 + K] = pi_t * survive[K] / pK;
    }

    d.tau[0] = M;
    for (std::size_t k = 0; k <= K; ++k) d.tau[1 + k] = 1.0 / (fp.beta(k, s) * s.schedule[k]);

    double total = 0.0;
    for (std::size_t u = 0; u < d.pi.size(); ++u) total += d.pi[u] * d.tau[u];
    d.pi_tilde.resize(d.pi.size());
    for (std::size_t u = 0; u < d.pi.size(); ++u) d.pi_tilde[u] = d.pi[u] * d.tau[u] / total;
    return d;
}

double network_throughput(const FixedPoint& fp, const AccessStrategy& s) {
    const std::size_t capture = s.capture_depth;
    const std::size_t n = fp.n;
    const double M = static_cast<double>(s.batch_size);
    const double q = fp.q_tilde;
    if (capture >= 1 && q < kLimitThreshold) return max_throughput(n, s.batch_size, capture);

    const auto pr = probabilities_at(q, n, capture, s.batch_size);
    if (pr.p_c <= 0.0) return 0.0;
    const double capture_factor = std::exp(pr.log_capture_factor);
    const double g_term = (pr.one_minus_pc - capture_factor) / pr.p_c;
    const double h_term = std::exp(pr.log_capture_factor - std::log(static_cast<double>(n)) -
                                   pr.log_pc - std::log(q));
    return M / (M + g_term + h_term);
}

double max_throughput(std::size_t n, std::uint64_t batch_size, std::size_t capture_depth) {
    if (n < 1) throw ConfigError("n must be >= 1");
    const double M = static_cast<double>(batch_size);
    const double nn = static_cast<double>(n);
    switch (capture_depth) {
        case 0:
            return M / (M - 1.0 + 1.0 / std::pow(1.0 - 1.0 / nn, nn - 1.0));
        case 1:
            return M / (M + (nn - 1.0) / nn);
        default:
            return 1.0;
    }
}

namespace {

ServiceMoments from_pgf(double gd1, double gd2) {
    ServiceMoments m;
    m.gd1 = gd1;
    m.gd2 = gd2;
    m.d_bar = gd1;
    m.sigma2 = std::max(0.0, gd2 + gd1 - gd1 * gd1);
    return m;
}

// Summation form; needs K >= 1 so that a failed fresh batch and the
// absorbing stage are distinct states.
ServiceMoments summation_form(const FixedPoint& fp, const AccessStrategy& s) {
    const std::size_t K = s.cutoff;
    const double M = static_cast<double>(s.batch_size);
    std::vector<double> y(K + 1), g2(K + 1), fail(K + 1);
    for (std::size_t k = 0; k <= K; ++k) {
        double rate = fp.beta(k, s) * s.schedule[k];
        if (k == K) rate *= fp.p(K, s);
        y[k] = 1.0 / rate;                          // G_Y'(1)
        g2[k] = 2.0 * (1.0 - rate) / (rate * rate);  // G_Y''(1)
        fail[k] = 1.0 - fp.p(k, s);
    }
    auto survive = [&](std::size_t from, std::size_t to) {
        double prod = 1.0;
        for (std::size_t i = from; i < to; ++i) prod *= fail[i];
        return prod;
    };
    auto stage_term = [&](std::size_t j) {
        double tail = 0.0;
        for (std::size_t k = j; k <= K; ++k) tail += y[k] * survive(j, k);
        return g2[j] + 2.0 * M * y[j] - 2.0 * y[j] * y[j] + 2.0 * y[j] * tail;
    };

    const double fresh_tx = fp.beta(0, s) * s.schedule[0];
    double gd1 = M - fresh_tx * y[0];
    double gd2 = M * (M - 1.0) - fresh_tx * stage_term(0);
    for (std::size_t j = 0; j <= K; ++j) {
        const double reach = survive(0, j);
        gd1 += y[j] * reach;
        gd2 += stage_term(j) * reach;
    }
    return from_pgf(gd1, gd2);
}

}  // namespace

ServiceMoments service_moments_general(const FixedPoint& fp, const AccessStrategy& strategy) {
    strategy.validate();
    if (strategy.cutoff > 0) return summation_form(fp, strategy);
    // A single-stage ladder behaves exactly like a two-stage one whose stages
    // share the same q, which the summation form handles directly.
    AccessStrategy widened = strategy;
    widened.cutoff = 1;
    widened.schedule.push_back(strategy.schedule[0]);
    return summation_form(fp, widened);
}

ServiceMoments service_moments_closed_form(const FixedPoint& fp, const AccessStrategy& s) {
    s.validate();
    if (s.cutoff != s.capture_depth) throw ConfigError("closed-form moments need K = n_C");
    const double M = static_cast<double>(s.batch_size);
    const double nc = static_cast<double>(s.capture_depth);
    const double pc = fp.p_c;
    const double miss = 1.0 - pc;
    const double capture_factor = s.capture_depth == 0 ? 1.0 : std::pow(miss, nc);
    const double x = 1.0 / (fp.p_nc * fp.beta_nc * s.noncapture_q());
    const double excess = x - 1.0 / pc;

    const double gd1 = M + miss / pc + capture_factor * excess;
    const double gd2 = M * (M - 1.0) + 2.0 * miss * (M - 1.0) / pc + 2.0 * miss / (pc * pc) +
                       2.0 * capture_factor * excess * (x + 1.0 / pc + M + nc - 2.0);
    return from_pgf(gd1, gd2);
}

ServiceMoments service_moments(const FixedPoint& fp, const AccessStrategy& strategy) {
    if (strategy.cutoff == strategy.capture_depth) return service_moments_closed_form(fp, strategy);
    return service_moments_general(fp, strategy);
}

double fairness_index(const ServiceMoments& moments, double horizon) {
    if (!(horizon >= 1.0)) throw ConfigError("T must be >= 1");
    if (moments.sigma2 == 0.0) return 1.0;
    return 1.0 / (1.0 + moments.variance_ratio() / horizon);
}

double variance_ratio_capture_free(double q0, std::size_t n, std::uint64_t batch_size) {
    if (!(q0 > 0.0 && q0 <= 1.0)) throw ConfigError("q0 must lie in (0,1]");
    if (n < 1) throw ConfigError("n must be >= 1");
    const double nn = static_cast<double>(n);
    const double M = static_cast<double>(batch_size);
    const double idle = n == 1 ? 1.0 : std::exp((nn - 1.0) * std::log1p(-q0));
    const double inv_f = 1.0 / (q0 * idle);
    return (inv_f + (nn - 1.0) * (M - 1.0)) * (1.0 - M / (inv_f + nn * (M - 1.0)));
}

Evaluation evaluate(const AccessStrategy& strategy, std::size_t n, double horizon) {
    Evaluation e;
    e.fixed_point = solve_fixed_point(strategy, n);
    e.moments = service_moments(e.fixed_point, strategy);
    e.throughput = network_throughput(e.fixed_point, strategy);
    e.fairness = fairness_index(e.moments, horizon);
    if (!std::isfinite(e.throughput) || !std::isfinite(e.moments.d_bar) ||
        !std::isfinite(e.moments.sigma2)) {
        throw NumericalError("non-finite throughput or service moments");
    }
    return e;
}

}  // namespace mtoa::analysis
