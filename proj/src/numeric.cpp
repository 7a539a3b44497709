#include "prefstein/numeric.hpp"

#include <algorithm>

namespace prefstein {

double tv_between(std::span<const double> p, std::span<const double> q) {
    const std::size_t n = std::max(p.size(), q.size());
    CompensatedSum acc;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = k < p.size() ? p[k] : 0.0;
        const double b = k < q.size() ? q[k] : 0.0;
        acc.add(std::abs(a - b));
    }
    return 0.5 * acc.value();
}

}  // namespace prefstein
