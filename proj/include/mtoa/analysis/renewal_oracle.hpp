#pragma once

#include <cstdint>

#include "mtoa/analysis/queueing.hpp"

namespace mtoa::analysis {

struct EmpiricalMoments {
    double mean = 0.0;
    double variance = 0.0;
    double mean_se = 0.0;      ///< standard error of the mean
    double variance_se = 0.0;  ///< standard error of the sample variance
    std::uint64_t batches = 0;
};

/// Monte-Carlo of the single-batch absorbing chain: draws `num_batches`
/// service times from the renewal recursions (geometric sojourns in B_k,
/// M slots in T) and returns their sample moments. Throws ConfigError when
/// num_batches < 2.
EmpiricalMoments hol_renewal_oracle(const FixedPoint& fp, const AccessStrategy& strategy,
                                    std::uint64_t seed, std::uint64_t num_batches);

}  // namespace mtoa::analysis
