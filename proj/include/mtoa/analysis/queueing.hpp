#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mtoa/strategy/strategy.hpp"

namespace mtoa::analysis {

using strategy::AccessStrategy;

/// Steady-state channel and success probabilities for a strategy and population.
struct FixedPoint {
    double beta_c = 1.0;   ///< channel not reserved, capture states (always 1)
    double beta_nc = 1.0;  ///< channel not reserved, non-capture states
    double p_c = 1.0;      ///< success given unreserved, capture states
    double p_nc = 1.0;     ///< success given unreserved, non-capture states
    double q_tilde = 1.0;  ///< average non-capture transmission probability
    std::size_t n = 1;
    std::size_t iterations = 0;  ///< 0 when the K = n_C closed form applied
    double residual = 0.0;

    /// beta^(k) for backoff stage k.
    double beta(std::size_t k, const AccessStrategy& s) const { return k < s.capture_depth ? beta_c : beta_nc; }
    /// p^(k) for backoff stage k.
    double p(std::size_t k, const AccessStrategy& s) const { return k < s.capture_depth ? p_c : p_nc; }
};

struct SolverOptions {
    double damping = 0.5;
    double tolerance = 1e-12;
    std::size_t max_iterations = 100000;
};

/// Solves the coupled (q~, p_C, p_nc, beta_nc) system. Closed form when
/// K = n_C; damped iteration on q~ otherwise, started from q_K and from
/// q_{n_C}. Throws NumericalError on non-convergence or when the two starts
/// disagree.
FixedPoint solve_fixed_point(const AccessStrategy& strategy, std::size_t n,
                             const SolverOptions& options = {});

/// Largest relative residual of the defining equations at `fp`.
double fixed_point_residual(const FixedPoint& fp, const AccessStrategy& strategy);

/// Index 0 is State T; index 1 + k is State B_k.
struct StateDistribution {
    std::vector<double> pi;        ///< embedded chain
    std::vector<double> tau;       ///< mean holding times
    std::vector<double> pi_tilde;  ///< limiting probabilities of the renewal process

    double per_node_throughput() const { return pi_tilde.front(); }
};

StateDistribution limiting_probabilities(const FixedPoint& fp, const AccessStrategy& strategy);

/// Network throughput from p_C, q~, n_C and M.
double network_throughput(const FixedPoint& fp, const AccessStrategy& strategy);

/// Supremum of the throughput over the non-capture probabilities.
double max_throughput(std::size_t n, std::uint64_t batch_size, std::size_t capture_depth);

struct ServiceMoments {
    double d_bar = 0.0;   ///< mean service time of a HOL batch (slots)
    double sigma2 = 0.0;  ///< variance of the service time (slots^2)
    double gd1 = 0.0;     ///< G_D'(1)
    double gd2 = 0.0;     ///< G_D''(1)

    double variance_ratio() const { return sigma2 / d_bar; }
};

/// Closed form when K = n_C, summation form otherwise.
ServiceMoments service_moments(const FixedPoint& fp, const AccessStrategy& strategy);

/// Summation form over the backoff ladder (any K).
ServiceMoments service_moments_general(const FixedPoint& fp, const AccessStrategy& strategy);

/// Closed form; requires K = n_C.
ServiceMoments service_moments_closed_form(const FixedPoint& fp, const AccessStrategy& strategy);

/// Short-term Jain index approximation 1 / (1 + (sigma^2 / D) / T).
double fairness_index(const ServiceMoments& moments, double horizon);

/// sigma^2 / D for K = n_C = 0 as an explicit function of q_0, n and M.
double variance_ratio_capture_free(double q0, std::size_t n, std::uint64_t batch_size);

/// Throughput and fairness of one strategy in one call.
struct Evaluation {
    FixedPoint fixed_point;
    ServiceMoments moments;
    double throughput = 0.0;
    double fairness = 0.0;
};

Evaluation evaluate(const AccessStrategy& strategy, std::size_t n, double horizon);

}  // namespace mtoa::analysis
