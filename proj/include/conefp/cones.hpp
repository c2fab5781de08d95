#ifndef CONEFP_CONES_HPP
#define CONEFP_CONES_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "conefp/common.hpp"
#include "conefp/grid.hpp"

namespace conefp::cones {

/// Annular section of a product cone: r_i <= ||u_i|| <= R_i componentwise.
struct ConeBox {
    std::array<double, 2> inner; // r_1, r_2
    std::array<double, 2> outer; // R_1, R_2

    ConeBox(std::array<double, 2> r, std::array<double, 2> R) : inner(r), outer(R) {
        for (int i = 0; i < 2; ++i) {
            require(inner[i] > 0.0, "ConeBox: inner radius must be positive");
            require(inner[i] < outer[i], "ConeBox: need inner < outer in each component");
        }
    }
};

/// Section cut with the concave functional phi_i(v) = min over [a,b] of v
/// as the inner bound and the sup-norm as the outer one.
struct PhiSection {
    std::array<double, 2> inner; // functional lower bounds
    std::array<double, 2> outer; // sup-norm upper bounds
    double a, b;                 // window [a,b] in (0,1)

    PhiSection(std::array<double, 2> r, std::array<double, 2> R, double a_, double b_)
        : inner(r), outer(R), a(a_), b(b_) {
        require(0.0 < a && a < b && b < 1.0, "PhiSection: window must satisfy 0 < a < b < 1");
        for (int i = 0; i < 2; ++i) {
            require(inner[i] > 0.0 && outer[i] > 0.0, "PhiSection: bounds must be positive");
            // Nonemptiness witness: the constant function with value outer[i]
            // has phi = outer[i], so the section is nonempty iff inner <= outer.
            require(inner[i] <= outer[i], "PhiSection: empty section (inner bound exceeds outer)");
        }
    }
};

enum class ComponentRegime { Compressive, Expansive };

/// Per-component compression/expansion pattern.
struct Regime {
    std::array<ComponentRegime, 2> tag;

    static Regime cc() { return {{ComponentRegime::Compressive, ComponentRegime::Compressive}}; }
    static Regime ce() { return {{ComponentRegime::Compressive, ComponentRegime::Expansive}}; }
    static Regime ec() { return {{ComponentRegime::Expansive, ComponentRegime::Compressive}}; }
    static Regime ee() { return {{ComponentRegime::Expansive, ComponentRegime::Expansive}}; }
};

inline const char* regime_name(ComponentRegime r) {
    return r == ComponentRegime::Compressive ? "compressive" : "expansive";
}

/// Index of the operator over the annular section by regime:
/// +1 when both components compress, -1 for mixed, +1 when both expand.
inline int expected_index(const Regime& regime) {
    const int expansive = (regime.tag[0] == ComponentRegime::Expansive ? 1 : 0) +
                          (regime.tag[1] == ComponentRegime::Expansive ? 1 : 0);
    return expansive == 1 ? -1 : 1;
}

/// Retraction of the closed ball {||u|| <= R} onto the annulus
/// {r <= ||u|| <= R} in a single component cone:
///
///              u + (r - ||u||)^2 h
///   rho(u) = r -------------------   when ||u|| < r,     rho(u) = u otherwise.
///             ||u + (r - ||u||)^2 h||
///
/// All norms are sup-norms; u and h are nonnegative coordinate vectors
/// (nodal values of a grid function, or a finite-dimensional point).
inline std::vector<double> retract_component(const std::vector<double>& u, double r, double R,
                                             const std::vector<double>& h) {
    require(r > 0.0 && r < R, "retract_component: need 0 < r < R");
    require(u.size() == h.size(), "retract_component: u and h must have equal length");
    require(sup_norm(h) > 0.0, "retract_component: h must be a nonzero cone element");
    for (double x : u) require(x >= 0.0, "retract_component: u must be nonnegative");
    for (double x : h) require(x >= 0.0, "retract_component: h must be nonnegative");
    const double nu = sup_norm(u);
    require(nu <= R, "retract_component: ||u|| exceeds the outer radius");
    if (nu >= r) return u;

    const double shift = (r - nu) * (r - nu);
    std::vector<double> w(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) w[j] = u[j] + shift * h[j];
    const double nw = sup_norm(w);
    // nw > 0: w is a sum of cone elements with shift > 0 and h != 0.
    std::vector<double> out(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) out[j] = r * (w[j] / nw);
    return out;
}

inline GridFunction retract_component(const GridFunction& u, double r, double R, const GridFunction& h) {
    return GridFunction(retract_component(u.values, r, R, h.values));
}

/// Default h: the constant-one element of the cone.
inline GridFunction ones_like(const GridFunction& u) { return GridFunction(u.size(), 1.0); }

/// phi(u) = min of u over [a,b], taking the grid nodes inside the window
/// together with the interpolated values at a and b, so the result does not
/// depend on whether the window endpoints are grid nodes.
inline double phi_min(const GridFunction& u, double a, double b) {
    require(a < b, "phi_min: empty window");
    require(a >= 0.0 && b <= 1.0, "phi_min: window must lie in [0,1]");
    double m = std::min(u.at(a), u.at(b));
    const std::size_t n = u.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(n - 1);
        if (t > a && t < b) m = std::min(m, u.values[j]);
    }
    return m;
}

} // namespace conefp::cones

#endif // CONEFP_CONES_HPP
