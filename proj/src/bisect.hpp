#pragma once

#include <algorithm>
#include <cmath>

namespace bumpcert::detail {

inline constexpr double kBisectRelWidth = 1e-12;
inline constexpr int kBisectMaxIter = 200;

// Bisection for a predicate that is true on [lo, root) and false on (root, hi].
// Returns the midpoint of the final bracket.
template <class Pred>
double bisect(Pred below_root, double lo, double hi) {
    for (int it = 0; it < kBisectMaxIter; ++it) {
        const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
        if (hi - lo <= kBisectRelWidth * scale) break;
        const double mid = 0.5 * (lo + hi);
        if (below_root(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace bumpcert::detail
