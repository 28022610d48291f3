#include "bbmlab/core/intervals.hpp"

#include <algorithm>
#include <cmath>

#include "bbmlab/error.hpp"

namespace bbm {

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
    if (n == 0 || successes > n) fail(ErrorKind::InvalidInput, "wilson_interval needs 0 <= successes <= n, n > 0");
    const double dn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / dn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * dn)) / (1.0 + z2 / dn);
    const double half = z / (1.0 + z2 / dn) * std::sqrt(p * (1.0 - p) / dn + z2 / (4.0 * dn * dn));
    const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = successes == n ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

}  // namespace bbm
