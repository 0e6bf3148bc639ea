#include <doctest.h>

#include <cmath>
#include <vector>

#include "mtoa/analysis/queueing.hpp"
#include "mtoa/analysis/renewal_oracle.hpp"
#include "mtoa/error.hpp"
#include "mtoa/rng.hpp"
#include "mtoa/tradeoff/tradeoff.hpp"
#include "../support/oracles.hpp"

using namespace mtoa;
using namespace mtoa::analysis;
using strategy::make_strategy;

namespace {

// Random valid strategy, optionally with a backoff ladder deeper than n_C.
AccessStrategy random_strategy(CounterStream& rng, bool deep) {
    AccessStrategy s;
    s.batch_size = 1 + (rng.bernoulli(0.5) ? rng.below(200) : 0);
    s.capture_depth = rng.below(4);
    s.cutoff = s.capture_depth + (deep ? rng.below(4) : 0);
    s.schedule.assign(s.cutoff + 1, 1.0);
    double q = std::pow(10.0, -0.3 - 3.0 * rng.uniform());
    for (std::size_t k = s.capture_depth; k <= s.cutoff; ++k) {
        s.schedule[k] = q;
        q *= 0.2 + 0.8 * rng.uniform();
    }
    return s;
}

std::vector<double> stage_values(const FixedPoint& fp, const AccessStrategy& s, bool beta) {
    std::vector<double> v;
    for (std::size_t k = 0; k <= s.cutoff; ++k) v.push_back(beta ? fp.beta(k, s) : fp.p(k, s));
    return v;
}

}  // namespace

TEST_CASE("fixed point: capture-free single-packet strategy") {
    const auto s = make_strategy(1, 0, 0.01);
    const auto fp = solve_fixed_point(s, 100);
    CHECK(fp.q_tilde == 0.01);
    CHECK(fp.p_c == doctest::Approx(std::pow(0.99, 99)).epsilon(1e-14));
    CHECK(fp.p_nc == fp.p_c);
    CHECK(fp.beta_c == 1.0);
    CHECK(fp.beta_nc == 1.0);
    CHECK(fp.p_c == doctest::Approx(0.3697).epsilon(1e-3));
}

TEST_CASE("fixed point: M = 1 leaves the channel unreserved") {
    for (double q : {1e-9, 1e-5, 1e-3, 0.05, 0.3}) {
        const auto fp = solve_fixed_point(make_strategy(1, 2, q), 100);
        CHECK(fp.beta_nc == 1.0);
        CHECK(fp.beta_c == 1.0);
    }
}

TEST_CASE("fixed point: connection-based reservation probability") {
    const auto s = make_strategy(100, 0, 0.01);
    const auto fp = solve_fixed_point(s, 100);
    CHECK(fp.p_c == doctest::Approx(0.3697).epsilon(1e-3));
    CHECK(fp.beta_nc == doctest::Approx(1.0 / (1.0 + 99.0 * 99.0 * fp.p_nc * 0.01)).epsilon(1e-14));
}

TEST_CASE("fixed point: residuals, ordering and the K = n_C collapse") {
    CounterStream rng(17, 0);
    for (int i = 0; i < 1000; ++i) {
        const bool deep = i % 2 == 1;
        const auto s = random_strategy(rng, deep);
        const std::size_t n = 2 + rng.below(999);
        const auto fp = solve_fixed_point(s, n);
        CHECK(fixed_point_residual(fp, s) < 1e-10);
        CHECK(fp.p_nc <= fp.p_c);
        if (s.capture_depth == 0) CHECK(fp.p_nc == fp.p_c);
        if (!deep) CHECK(fp.q_tilde == s.noncapture_q());
        for (double v : {fp.beta_nc, fp.p_c, fp.p_nc, fp.q_tilde}) CHECK((v > 0.0 && v <= 1.0));
        if (s.batch_size == 1) CHECK(fp.beta_nc == 1.0);
    }
}

TEST_CASE("fixed point: iteration budget exhaustion reports the residual") {
    AccessStrategy s;
    s.batch_size = 1;
    s.capture_depth = 0;
    s.cutoff = 3;
    s.schedule = {0.3, 0.1, 0.03, 0.01};
    SolverOptions opt;
    opt.max_iterations = 1;
    try {
        solve_fixed_point(s, 50, opt);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.residual() > 0.0);
    }
    CHECK_NOTHROW(solve_fixed_point(s, 50));
}

TEST_CASE("limiting probabilities match the embedded chain solved numerically") {
    CounterStream rng(23, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_strategy(rng, i % 2 == 1);
        const std::size_t n = 1 + rng.below(500);
        const auto fp = solve_fixed_point(s, n);
        const auto d = limiting_probabilities(fp, s);
        const auto P = oracle::embedded_chain(stage_values(fp, s, true), stage_values(fp, s, false), s.schedule);
        const auto pi = oracle::stationary(P);
        REQUIRE(pi.size() == d.pi.size());
        double sum = 0.0, sum_tilde = 0.0;
        for (std::size_t u = 0; u < pi.size(); ++u) {
            CHECK(d.pi[u] == doctest::Approx(pi[u]).epsilon(1e-9));
            CHECK(d.pi[u] >= 0.0);
            sum += d.pi[u];
            sum_tilde += d.pi_tilde[u];
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(std::abs(sum_tilde - 1.0) < 1e-12);
        CHECK(d.tau[0] == static_cast<double>(s.batch_size));
        // Network throughput is n times the time share of State T.
        CHECK(static_cast<double>(n) * d.per_node_throughput() ==
              doctest::Approx(network_throughput(fp, s)).epsilon(1e-9));
    }
}

TEST_CASE("limiting probabilities: a lone node is always transmitting") {
    const auto s = make_strategy(1, 0, 1.0);
    const auto d = limiting_probabilities(solve_fixed_point(s, 1), s);
    CHECK(d.pi_tilde[0] == doctest::Approx(1.0));
}

TEST_CASE("network_throughput examples") {
    const auto a = make_strategy(1, 0, 0.01);
    CHECK(network_throughput(solve_fixed_point(a, 100), a) == doctest::Approx(0.3697).epsilon(3e-4));
    const auto b = make_strategy(1, 1, 1e-8);
    CHECK(std::abs(network_throughput(solve_fixed_point(b, 100), b) - 0.50251) < 1e-3);
    const auto c = make_strategy(10, 0, 0.01);
    const double lam = network_throughput(solve_fixed_point(c, 100), c);
    CHECK(std::abs(lam - 10.0 / (9.0 + 1.0 / std::pow(0.99, 99))) < 1e-3);
    CHECK(std::abs(lam - 0.8544) < 1e-3);
}

TEST_CASE("network_throughput agrees with the renewal oracle") {
    // Per-node throughput is M packets per mean service time.
    const auto s = make_strategy(10, 0, 0.01);
    const auto fp = solve_fixed_point(s, 100);
    const auto emp = hol_renewal_oracle(fp, s, 77, 100000);
    const double lam = network_throughput(fp, s);
    const double from_oracle = 100.0 * 10.0 / emp.mean;
    const double se = from_oracle * emp.mean_se / emp.mean;
    CHECK(std::abs(lam - from_oracle) < 3.0 * se);
}

TEST_CASE("throughput equals n M / D") {
    CounterStream rng(29, 0);
    for (int i = 0; i < 500; ++i) {
        const auto s = random_strategy(rng, i % 2 == 1);
        const std::size_t n = 2 + rng.below(300);
        const auto e = evaluate(s, n, 1e7);
        CHECK(e.throughput == doctest::Approx(static_cast<double>(n * s.batch_size) / e.moments.d_bar).epsilon(1e-9));
    }
}

TEST_CASE("capture-free throughput matches the rewritten form on a q grid") {
    for (std::size_t n : {2u, 10u, 100u, 1000u}) {
        for (std::uint64_t M : {1u, 7u, 1000u}) {
            for (double q : mtoa::tradeoff::log_space(1e-6, 0.9, 60)) {
                const auto s = make_strategy(M, 0, q);
                const double got = network_throughput(solve_fixed_point(s, n), s);
                CHECK(got == doctest::Approx(oracle::capture_free_throughput(n, static_cast<double>(M), q)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("max_throughput closed forms and grid suprema") {
    CHECK(std::abs(max_throughput(100, 1, 0) - 0.369730) < 1e-6);
    CHECK(std::abs(max_throughput(100, 1, 1) - 100.0 / 199.0) < 1e-6);
    CHECK(std::abs(max_throughput(100, 1, 1) - 0.502513) < 1e-6);
    CHECK(max_throughput(100, 1, 2) == 1.0);
    CHECK(max_throughput(100, 1, 4) == 1.0);

    for (std::size_t nc : {0u, 1u, 2u}) {
        double best = 0.0;
        for (double q : mtoa::tradeoff::log_space(1e-10, 0.5, 4000)) {
            const auto s = make_strategy(1, nc, q);
            best = std::max(best, network_throughput(solve_fixed_point(s, 100), s));
        }
        const double sup = max_throughput(100, 1, nc);
        CHECK(best <= sup + 1e-12);
        CHECK(best > sup - 1e-4);
    }
}

TEST_CASE("capture-free throughput peaks at q = 1/n") {
    for (std::size_t n : {2u, 10u, 100u, 1000u}) {
        const double step = 1e-5;
        double best_q = 0.0, best = -1.0;
        for (double q = step; q <= 1.0; q += step) {
            const auto s = make_strategy(1, 0, q);
            const double v = network_throughput(solve_fixed_point(s, n), s);
            if (v > best) {
                best = v;
                best_q = q;
            }
        }
        CHECK(std::abs(best_q - 1.0 / static_cast<double>(n)) <= step);
    }
}

TEST_CASE("capture-based throughput strictly decreases in q") {
    for (std::size_t nc : {1u, 2u, 3u}) {
        for (std::uint64_t M : {1u, 50u}) {
            double prev = 2.0;
            for (double q : mtoa::tradeoff::log_space(1e-8, 1e-1, 200)) {
                const auto s = make_strategy(M, nc, q);
                const double v = network_throughput(solve_fixed_point(s, 100), s);
                CHECK(v < prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("tiny q with capture uses the analytic limit") {
    const auto s = make_strategy(1, 1, 1e-15);
    CHECK(network_throughput(solve_fixed_point(s, 100), s) == max_throughput(100, 1, 1));
    const auto t = make_strategy(3, 2, 1e-300);
    CHECK(network_throughput(solve_fixed_point(t, 100), t) == 1.0);
}

TEST_CASE("service moments: geometric service of a single-packet capture-free node") {
    for (double q : {0.5, 0.01, 0.2}) {
        const std::size_t n = 100;
        const auto s = make_strategy(1, 0, q);
        const auto m = service_moments(solve_fixed_point(s, n), s);
        const double p = q * std::pow(1.0 - q, 99.0);
        CHECK(m.d_bar == doctest::Approx(1.0 / p).epsilon(1e-12));
        CHECK(m.sigma2 == doctest::Approx((1.0 - p) / (p * p)).epsilon(1e-10));
        CHECK(m.gd1 == m.d_bar);
        CHECK(m.sigma2 == doctest::Approx(m.gd2 + m.gd1 - m.gd1 * m.gd1).epsilon(1e-12));
    }
}

TEST_CASE("service moments: variance ratio at q = 1/n") {
    const auto s = make_strategy(1, 0, 0.01);
    const auto m = service_moments(solve_fixed_point(s, 100), s);
    const double exact = oracle::product_form_ratio(0.01, 100, 1.0);
    CHECK(m.variance_ratio() == doctest::Approx(exact).epsilon(1e-10));
    CHECK(std::abs(m.variance_ratio() - 269.468) < 1e-3);
    CHECK(std::abs(m.variance_ratio() - 100.0 * std::exp(1.0)) / (100.0 * std::exp(1.0)) < 0.01);
}

TEST_CASE("service moments: summation and closed forms agree when K = n_C") {
    const auto s = make_strategy(100, 0, 0.01);
    const auto fp = solve_fixed_point(s, 100);
    const auto a = service_moments_general(fp, s);
    const auto b = service_moments_closed_form(fp, s);
    CHECK(a.d_bar == doctest::Approx(b.d_bar).epsilon(1e-10));
    CHECK(a.sigma2 == doctest::Approx(b.sigma2).epsilon(1e-10));

    CounterStream rng(31, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto r = random_strategy(rng, false);
        const auto f = solve_fixed_point(r, 2 + rng.below(500));
        const auto g = service_moments_general(f, r);
        const auto c = service_moments_closed_form(f, r);
        CHECK(g.d_bar == doctest::Approx(c.d_bar).epsilon(1e-9));
        CHECK(g.sigma2 == doctest::Approx(c.sigma2).epsilon(1e-7));
        CHECK(c.d_bar >= static_cast<double>(r.batch_size));
        CHECK(c.sigma2 >= 0.0);
    }
    AccessStrategy deep = make_strategy(1, 0, 0.1);
    deep.cutoff = 1;
    deep.schedule.push_back(0.05);
    CHECK_THROWS_AS(service_moments_closed_form(solve_fixed_point(deep, 10), deep), ConfigError);
}

TEST_CASE("renewal oracle: geometric service") {
    const auto s = make_strategy(1, 0, 0.5);
    const auto fp = solve_fixed_point(s, 1);
    const auto emp = hol_renewal_oracle(fp, s, 1, 100000);
    CHECK(std::abs(emp.mean - 2.0) < 3.0 * emp.mean_se);
    CHECK(emp.batches == 100000);
    CHECK_THROWS_AS(hol_renewal_oracle(fp, s, 1, 1), ConfigError);
}

TEST_CASE("renewal oracle: two capture states") {
    const auto s = make_strategy(1, 2, 1e-3);
    const auto fp = solve_fixed_point(s, 100);
    const auto m = service_moments(fp, s);
    const auto emp = hol_renewal_oracle(fp, s, 2, 100000);
    CHECK(std::abs(emp.mean - m.d_bar) < 3.0 * emp.mean_se);
}

TEST_CASE("renewal oracle: connection-based variance") {
    const auto s = make_strategy(100, 0, 0.01);
    const auto fp = solve_fixed_point(s, 100);
    const auto m = service_moments(fp, s);
    const auto emp = hol_renewal_oracle(fp, s, 3, 100000);
    CHECK(std::abs(emp.variance - m.sigma2) < 3.0 * emp.variance_se);
    CHECK(std::abs(emp.mean - m.d_bar) < 3.0 * emp.mean_se);
}

TEST_CASE("fairness_index examples") {
    ServiceMoments zero;
    zero.d_bar = 5.0;
    CHECK(fairness_index(zero, 10.0) == 1.0);
    ServiceMoments m;
    m.d_bar = 1.0;
    m.sigma2 = 269.49;
    CHECK(std::abs(fairness_index(m, 1e7) - 0.9999731) < 1e-7);
    m.sigma2 = 1000.0;
    CHECK(fairness_index(m, 1000.0) == doctest::Approx(0.5));
    CHECK(fairness_index(m, 1e4) > fairness_index(m, 1e3));
    CHECK_THROWS_AS(fairness_index(m, 0.5), ConfigError);
}

TEST_CASE("variance_ratio_capture_free") {
    CHECK(variance_ratio_capture_free(1.0, 1, 1) == 0.0);
    CHECK(std::abs(variance_ratio_capture_free(0.01, 100, 1) - 269.468) < 1e-3);
    for (double q : {1e-4, 0.003, 0.2}) {
        for (std::uint64_t M : {1u, 10u, 1000u}) {
            CHECK(variance_ratio_capture_free(q, 100, M) ==
                  doctest::Approx(oracle::product_form_ratio(q, 100, static_cast<double>(M))).epsilon(1e-10));
            const auto s = make_strategy(M, 0, q);
            const auto m = service_moments(solve_fixed_point(s, 100), s);
            CHECK(m.variance_ratio() == doctest::Approx(variance_ratio_capture_free(q, 100, M)).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(variance_ratio_capture_free(0.0, 10, 1), ConfigError);
}

TEST_CASE("variance ratio doubles per capture state as q halves") {
    for (std::size_t nc : {1u, 2u}) {
        const double q = 1e-6;
        const auto a = make_strategy(1, nc, q);
        const auto b = make_strategy(1, nc, q / 2.0);
        const double ra = service_moments(solve_fixed_point(a, 100), a).variance_ratio();
        const double rb = service_moments(solve_fixed_point(b, 100), b).variance_ratio();
        const double target = std::pow(2.0, static_cast<double>(nc));
        CHECK(std::abs(rb / ra - target) / target < 0.10);
    }
}
