#ifndef CONEFP_GRID_HPP
#define CONEFP_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "conefp/common.hpp"

namespace conefp {

/// A real-valued function sampled on the uniform node grid
/// t_j = j/(N-1), j = 0..N-1, over [0,1]. Values between nodes mean the
/// piecewise-linear interpolant.
struct GridFunction {
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(std::size_t n, double fill = 0.0) : values(n, fill) {}
    explicit GridFunction(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double node(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(values.size() - 1); }
    double step() const { return 1.0 / static_cast<double>(values.size() - 1); }

    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }

    /// Linear interpolation at t in [0,1].
    double at(double t) const {
        const std::size_t n = values.size();
        if (n == 1 || t <= 0.0) return values.front();
        if (t >= 1.0) return values.back();
        const double x = t * static_cast<double>(n - 1);
        const std::size_t j = std::min(static_cast<std::size_t>(x), n - 2);
        const double w = x - static_cast<double>(j);
        return (1.0 - w) * values[j] + w * values[j + 1];
    }

    template <typename F>
    static GridFunction sample(std::size_t n, F&& f) {
        GridFunction g(n);
        for (std::size_t j = 0; j < n; ++j)
            g.values[j] = f(static_cast<double>(j) / static_cast<double>(n - 1));
        return g;
    }
};

inline double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

inline double sup_norm(const GridFunction& g) { return sup_norm(g.values); }

inline double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::fabs(a[j] - b[j]));
    return m;
}

inline double sup_dist(const GridFunction& a, const GridFunction& b) {
    return sup_dist(a.values, b.values);
}

inline bool nonnegative(const GridFunction& g, double tol = 0.0) {
    for (double x : g.values)
        if (x < -tol) return false;
    return true;
}

inline bool nonincreasing(const GridFunction& g, double tol = 0.0) {
    for (std::size_t j = 0; j + 1 < g.size(); ++j)
        if (g.values[j + 1] > g.values[j] + tol) return false;
    return true;
}

/// A pair (u_1, u_2) of grid functions on a shared grid.
struct GridPair {
    GridFunction u1, u2;

    GridPair() = default;
    GridPair(GridFunction a, GridFunction b) : u1(std::move(a)), u2(std::move(b)) {
        require(u1.size() == u2.size(), "GridPair: components must share a grid");
    }

    std::size_t size() const { return u1.size(); }
    const GridFunction& component(int i) const { return i == 0 ? u1 : u2; }
    GridFunction& component(int i) { return i == 0 ? u1 : u2; }
};

inline double sup_dist(const GridPair& a, const GridPair& b) {
    return std::max(sup_dist(a.u1, b.u1), sup_dist(a.u2, b.u2));
}

inline double sup_norm(const GridPair& u) {
    return std::max(sup_norm(u.u1), sup_norm(u.u2));
}

} // namespace conefp

#endif // CONEFP_GRID_HPP
