#pragma once

#include <cstdint>

namespace bbm {

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

/// Wilson score interval for a binomial proportion; z is the normal quantile (1.96 for 95%).
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.959963984540054);

}  // namespace bbm
