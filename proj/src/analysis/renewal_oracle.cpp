#include "mtoa/analysis/renewal_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtoa/error.hpp"
#include "mtoa/rng.hpp"

namespace mtoa::analysis {

namespace {

// Slots up to and including the first success of a Bernoulli(s) sequence.
double geometric(double s, CounterStream& rng) {
    if (s >= 1.0) return 1.0;
    const double u = rng.uniform_open_zero();
    return 1.0 + std::floor(std::log(u) / std::log1p(-s));
}

}  // namespace

EmpiricalMoments hol_renewal_oracle(const FixedPoint& fp, const AccessStrategy& s,
                                    std::uint64_t seed, std::uint64_t num_batches) {
    if (num_batches < 2) throw ConfigError("renewal oracle needs at least 2 batches");
    s.validate();
    const std::size_t K = s.cutoff;
    const double tail = static_cast<double>(s.batch_size) - 1.0;
    CounterStream rng(seed, 0);

    std::vector<double> samples;
    samples.reserve(num_batches);
    for (std::uint64_t b = 0; b < num_batches; ++b) {
        // A fresh batch sits in B_0; each stage ends with a transmission,
        // which either starts the M-slot reservation or moves one stage on.
        double d = 0.0;
        for (std::size_t stage = 0;; ++stage) {
            const double rate = fp.beta(stage, s) * s.schedule[stage];
            if (stage == K) {
                d += geometric(fp.p(K, s) * rate, rng) + tail;
                break;
            }
            d += geometric(rate, rng);
            if (rng.bernoulli(fp.p(stage, s))) {
                d += tail;
                break;
            }
        }
        samples.push_back(d);
    }

    const double count = static_cast<double>(num_batches);
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= count;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double x : samples) {
        const double dev = (x - mean) * (x - mean);
        m2 += dev;
        m4 += dev * dev;
    }
    EmpiricalMoments out;
    out.batches = num_batches;
    out.mean = mean;
    out.variance = m2 / (count - 1.0);
    out.mean_se = std::sqrt(out.variance / count);
    const double pop_var = m2 / count;
    out.variance_se = std::sqrt(std::max(0.0, m4 / count - pop_var * pop_var) / count);
    return out;
}

}  // namespace mtoa::analysis
