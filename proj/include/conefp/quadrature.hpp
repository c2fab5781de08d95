#ifndef CONEFP_QUADRATURE_HPP
#define CONEFP_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "conefp/common.hpp"

namespace conefp::quad {

/// Composite Newton-Cotes weights for m equal intervals of width h
/// (m+1 nodes). Even m uses plain composite Simpson; odd m >= 3 uses
/// Simpson on the first m-3 intervals and the 3/8 rule on the last three,
/// which keeps the O(h^4) order. m = 1 falls back to the trapezoid.
inline std::vector<double> composite_weights(std::size_t m, double h) {
    std::vector<double> w(m + 1, 0.0);
    if (m == 0) return w;
    if (m == 1) {
        w[0] = w[1] = h / 2.0;
        return w;
    }
    const std::size_t simpson_m = (m % 2 == 0) ? m : m - 3;
    for (std::size_t k = 0; k + 2 <= simpson_m; k += 2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if (m % 2 != 0) {
        const std::size_t k = simpson_m;
        w[k] += 3.0 * h / 8.0;
        w[k + 1] += 9.0 * h / 8.0;
        w[k + 2] += 9.0 * h / 8.0;
        w[k + 3] += 3.0 * h / 8.0;
    }
    return w;
}

/// Composite Simpson over [lo,hi] with at least `npts` samples (rounded up
/// to an odd count so the interval count is even).
inline double simpson(const std::function<double(double)>& f, double lo, double hi, std::size_t npts) {
    if (hi <= lo) return 0.0;
    if (npts < 3) npts = 3;
    if (npts % 2 == 0) ++npts;
    const std::size_t m = npts - 1;
    const double h = (hi - lo) / static_cast<double>(m);
    double acc = f(lo) + f(hi);
    for (std::size_t k = 1; k < m; ++k)
        acc += f(lo + h * static_cast<double>(k)) * (k % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Simpson over [lo,hi] split at an interior kink. Each side gets roughly
/// npts/2 samples. Used for kernels whose s-derivative is discontinuous at
/// s = t.
inline double simpson_split(const std::function<double(double)>& f, double lo, double hi,
                            double split_at, std::size_t npts) {
    if (hi <= lo) return 0.0;
    if (split_at <= lo || split_at >= hi)
        return simpson(f, lo, hi, npts);
    const std::size_t half = npts / 2 + 1;
    return simpson(f, lo, split_at, half) + simpson(f, split_at, hi, half);
}

/// Cumulative trapezoid of samples y on a uniform grid with step h:
/// out[j] = integral from node 0 to node j.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& y, double h) {
    std::vector<double> out(y.size(), 0.0);
    for (std::size_t j = 1; j < y.size(); ++j)
        out[j] = out[j - 1] + 0.5 * h * (y[j - 1] + y[j]);
    return out;
}

} // namespace conefp::quad

#endif // CONEFP_QUADRATURE_HPP
