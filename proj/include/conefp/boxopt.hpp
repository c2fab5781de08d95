#ifndef CONEFP_BOXOPT_HPP
#define CONEFP_BOXOPT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "conefp/common.hpp"

namespace conefp::boxopt {

using Bivariate = std::function<double(double, double)>;

enum class Monotone { Nondecreasing, Unknown };

/// Per-variable monotonicity declaration for a bivariate function.
struct MonotoneTags {
    std::array<Monotone, 2> tag{{Monotone::Unknown, Monotone::Unknown}};

    static MonotoneTags both() { return {{Monotone::Nondecreasing, Monotone::Nondecreasing}}; }
    static MonotoneTags none() { return {{Monotone::Unknown, Monotone::Unknown}}; }
    bool all_nondecreasing() const {
        return tag[0] == Monotone::Nondecreasing && tag[1] == Monotone::Nondecreasing;
    }
};

/// Axis-aligned rectangle [lo1,hi1] x [lo2,hi2]; degenerate edges allowed.
struct Rect {
    double lo1, hi1, lo2, hi2;

    Rect(double a, double b, double c, double d) : lo1(a), hi1(b), lo2(c), hi2(d) {
        require(lo1 <= hi1 && lo2 <= hi2, "Rect: need lo <= hi in each variable");
    }
};

struct MonotonicityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Spot-check a Nondecreasing declaration on random ordered pairs inside the
/// rectangle. Not a proof, but catches mis-tagged nonlinearities cheaply.
inline void spot_check_monotone(const Bivariate& f, const Rect& rect, const MonotoneTags& tags,
                                std::uint64_t seed = 0, int samples = 100) {
    Rng rng(seed);
    for (int axis = 0; axis < 2; ++axis) {
        if (tags.tag[static_cast<std::size_t>(axis)] != Monotone::Nondecreasing) continue;
        for (int k = 0; k < samples; ++k) {
            const double x = rng.uniform(rect.lo1, rect.hi1);
            const double y = rng.uniform(rect.lo2, rect.hi2);
            double lo_val, hi_val;
            if (axis == 0) {
                const double x2 = x + rng.uniform() * (rect.hi1 - x);
                lo_val = f(x, y);
                hi_val = f(x2, y);
            } else {
                const double y2 = y + rng.uniform() * (rect.hi2 - y);
                lo_val = f(x, y);
                hi_val = f(x, y2);
            }
            const double slack = 1e-12 * (1.0 + std::fabs(lo_val));
            if (hi_val < lo_val - slack)
                throw MonotonicityViolation(
                    "monotonicity spot-check failed in variable " + std::to_string(axis + 1));
        }
    }
}

namespace detail {

inline double coord(double lo, double hi, int k, int n) {
    if (n <= 1 || hi <= lo) return lo;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
}

struct GridScan {
    double value;
    int i, j;
};

template <typename Better>
GridScan scan(const Bivariate& f, const Rect& r, int n, Better better) {
    GridScan best{0.0, 0, 0};
    bool first = true;
    for (int i = 0; i < n; ++i) {
        const double x = coord(r.lo1, r.hi1, i, n);
        for (int j = 0; j < n; ++j) {
            const double y = coord(r.lo2, r.hi2, j, n);
            const double v = f(x, y);
            if (!std::isfinite(v))
                throw std::runtime_error("boxopt: non-finite function value in rectangle scan");
            if (first || better(v, best.value)) {
                best = GridScan{v, i, j};
                first = false;
            }
        }
    }
    return best;
}

// Coarse scan plus one refinement pass on the cell neighborhood of the
// incumbent. Returns an estimate that only improves with grid_n for nested
// grid sizes.
template <typename Better>
double scan_refine(const Bivariate& f, const Rect& r, int grid_n, Better better) {
    const GridScan coarse = scan(f, r, grid_n, better);
    Rect sub(coord(r.lo1, r.hi1, std::max(coarse.i - 1, 0), grid_n),
             coord(r.lo1, r.hi1, std::min(coarse.i + 1, grid_n - 1), grid_n),
             coord(r.lo2, r.hi2, std::max(coarse.j - 1, 0), grid_n),
             coord(r.lo2, r.hi2, std::min(coarse.j + 1, grid_n - 1), grid_n));
    const GridScan fine = scan(f, sub, grid_n, better);
    return better(fine.value, coarse.value) ? fine.value : coarse.value;
}

} // namespace detail

inline constexpr int kDefaultGridN = 129;

/// Estimate of min f over the rectangle. With both variables tagged
/// Nondecreasing this is the exact corner value f(lo1,lo2); otherwise a
/// sampled upper bound on the true minimum that converges as grid_n grows.
inline double box_min(const Bivariate& f, const Rect& rect, const MonotoneTags& tags,
                      int grid_n = kDefaultGridN, std::uint64_t seed = 0) {
    require(grid_n >= 2, "box_min: grid_n must be at least 2");
    spot_check_monotone(f, rect, tags, seed);
    if (tags.all_nondecreasing()) {
        const double v = f(rect.lo1, rect.lo2);
        if (!std::isfinite(v)) throw std::runtime_error("box_min: non-finite corner value");
        return v;
    }
    return detail::scan_refine(f, rect, grid_n, [](double a, double b) { return a < b; });
}

/// Dual of box_min: exact corner f(hi1,hi2) for nondecreasing tags, else a
/// sampled lower bound on the true maximum.
inline double box_max(const Bivariate& f, const Rect& rect, const MonotoneTags& tags,
                      int grid_n = kDefaultGridN, std::uint64_t seed = 0) {
    require(grid_n >= 2, "box_max: grid_n must be at least 2");
    spot_check_monotone(f, rect, tags, seed);
    if (tags.all_nondecreasing()) {
        const double v = f(rect.hi1, rect.hi2);
        if (!std::isfinite(v)) throw std::runtime_error("box_max: non-finite corner value");
        return v;
    }
    return detail::scan_refine(f, rect, grid_n, [](double a, double b) { return a > b; });
}

} // namespace conefp::boxopt

#endif // CONEFP_BOXOPT_HPP
