#ifndef CONEFP_PLAPLACIAN_HPP
#define CONEFP_PLAPLACIAN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conefp/boxopt.hpp"
#include "conefp/certificate.hpp"
#include "conefp/cones.hpp"
#include "conefp/grid.hpp"
#include "conefp/hammerstein.hpp" // NonlinearitySpec

namespace conefp::plaplacian {

using hammerstein::NonlinearitySpec;

/// phi_p(t) = |t|^(p-2) t, the p-Laplacian homeomorphism of R.
inline double phi_p(double t, double p) {
    require(p > 1.0, "phi_p: need p > 1");
    if (t == 0.0) return 0.0;
    return std::pow(std::fabs(t), p - 2.0) * t;
}

/// Inverse of phi_p: |y|^(1/(p-1)) sign(y).
inline double phi_p_inv(double y, double p) {
    require(p > 1.0, "phi_p_inv: need p > 1");
    if (y == 0.0) return 0.0;
    const double mag = std::pow(std::fabs(y), 1.0 / (p - 1.0));
    return y > 0.0 ? mag : -mag;
}

/// Cone constant c = ((p-n)/(p-1)) (1-b) a^(n/(p-1)) of the radial cone.
inline double cone_constant(double p, int n, double a, double b) {
    require(n >= 2, "cone_constant: need dimension n >= 2");
    require(p > static_cast<double>(n), "cone_constant: need p > n");
    require(0.0 < a && a < b && b < 1.0, "cone_constant: window must satisfy 0 < a < b < 1");
    return (p - static_cast<double>(n)) / (p - 1.0) * (1.0 - b) *
           std::pow(a, static_cast<double>(n) / (p - 1.0));
}

/// Exponents and window of the radial (p1,p2)-Laplacian system on the unit
/// ball: -[r^(n-1) phi_{p_i}(u_i')]' = r^(n-1) f_i(u_1,u_2), u_i'(0)=u_i(1)=0.
struct PParams {
    double p1, p2;
    int n;
    double a, b;

    PParams(double p1_, double p2_, int n_, double a_, double b_) : p1(p1_), p2(p2_), n(n_), a(a_), b(b_) {
        require(n >= 2, "PParams: need dimension n >= 2");
        require(p1 > static_cast<double>(n) && p2 > static_cast<double>(n), "PParams: need p_i > n");
        require(0.0 < a && a < b && b < 1.0, "PParams: window must satisfy 0 < a < b < 1");
    }

    double p(int i) const { return i == 0 ? p1 : p2; }
    double c(int i) const { return cone_constant(p(i), n, a, b); }
};

/// Radial problem: parameters plus two nonlinearities, both required to be
/// nondecreasing in both variables (the cone-invariance argument needs it).
class RadialProblem {
public:
    RadialProblem(PParams params, NonlinearitySpec f1, NonlinearitySpec f2, std::size_t grid_n = 513,
                  std::uint64_t seed = 0)
        : params_(params), fs_{std::move(f1), std::move(f2)}, n_(grid_n) {
        require(n_ >= 9, "RadialProblem: grid needs at least 9 nodes");
        for (int i = 0; i < 2; ++i) {
            require(fs_[static_cast<std::size_t>(i)].tags.all_nondecreasing(),
                    "RadialProblem: nonlinearities must be declared nondecreasing in both variables");
            boxopt::spot_check_monotone(fs_[static_cast<std::size_t>(i)].f, boxopt::Rect(0.0, 10.0, 0.0, 10.0),
                                        fs_[static_cast<std::size_t>(i)].tags, seed);
        }
    }

    const PParams& params() const { return params_; }
    const NonlinearitySpec& nonlinearity(int i) const { return fs_[static_cast<std::size_t>(i)]; }
    std::size_t grid_size() const { return n_; }

private:
    PParams params_;
    std::array<NonlinearitySpec, 2> fs_;
    std::size_t n_;
};

// ---------------------------------------------------------------------------
// the radial integral operator
//
//              / 1
//   T_i(u)(r) = |  phi_{p_i}^{-1}( s^(1-n) * F_i(s) ) ds,
//              / r
//
//              / s
//     F_i(s) = |  tau^(n-1) f_i(u_1(tau), u_2(tau)) dtau.
//              / 0
//
// Both nested integrals are cumulative trapezoids evaluated on a subsampled
// grid (kSubsteps points per cell, u interpolated linearly); near s = 0 the
// outer integrand behaves like (f(u(0)) s / n)^(1/(p-1)), whose fractional
// power defeats the trapezoid, so the first subcell uses that local model in
// closed form. Outputs are exact at r = 1 and nonincreasing by construction.

inline constexpr int kSubsteps = 8;

inline GridPair apply_T_radial(const RadialProblem& problem, const GridPair& u) {
    const std::size_t n = problem.grid_size();
    require(u.size() == n, "apply_T_radial: grid size mismatch");
    require(nonnegative(u.u1) && nonnegative(u.u2), "apply_T_radial: input must be nonnegative");
    const double mono_tol = 1e-12 * (1.0 + sup_norm(u));
    require(nonincreasing(u.u1, mono_tol) && nonincreasing(u.u2, mono_tol),
            "apply_T_radial: input components must be nonincreasing (cone membership)");

    const int dim = problem.params().n;
    const std::size_t sub_n = (n - 1) * static_cast<std::size_t>(kSubsteps) + 1;
    const double hs = 1.0 / static_cast<double>(sub_n - 1);

    GridPair out{GridFunction(n), GridFunction(n)};
    std::vector<double> inner(sub_n), psi(sub_n), Psi(sub_n);
    for (int i = 0; i < 2; ++i) {
        const double p = problem.params().p(i);
        const double q = 1.0 / (p - 1.0);
        const auto& f = problem.nonlinearity(i);

        // inner(k) = integral of tau^(n-1) f(u(tau)) up to s_k
        inner[0] = 0.0;
        double prev = 0.0; // integrand at previous subnode
        for (std::size_t k = 1; k < sub_n; ++k) {
            const double s = static_cast<double>(k) * hs;
            const double cur = std::pow(s, dim - 1) * f(u.u1.at(s), u.u2.at(s));
            inner[k] = inner[k - 1] + 0.5 * hs * (prev + cur);
            prev = cur;
        }

        // psi(k) = phi_p^{-1}( s^(1-n) inner(k) ), psi(0) by the s->0 limit
        psi[0] = 0.0;
        for (std::size_t k = 1; k < sub_n; ++k) {
            const double s = static_cast<double>(k) * hs;
            psi[k] = phi_p_inv(inner[k] / std::pow(s, dim - 1), p);
        }

        // Psi(k) = integral of psi from 0 to s_k; first subcell from the
        // local model integral of (f(u(0)) s / n)^q
        const double f0 = f(u.u1.values[0], u.u2.values[0]);
        Psi[0] = 0.0;
        Psi[1] = std::pow(f0 / static_cast<double>(dim), q) * std::pow(hs, q + 1.0) / (q + 1.0);
        for (std::size_t k = 2; k < sub_n; ++k)
            Psi[k] = Psi[k - 1] + 0.5 * hs * (psi[k - 1] + psi[k]);

        GridFunction& o = out.component(i);
        const double total = Psi[sub_n - 1];
        for (std::size_t j = 0; j < n; ++j)
            o.values[j] = total - Psi[j * static_cast<std::size_t>(kSubsteps)];
        o.values[n - 1] = 0.0;
    }
    return out;
}

inline double residual_radial(const RadialProblem& problem, const GridPair& u) {
    return sup_dist(u, apply_T_radial(problem, u));
}

// ---------------------------------------------------------------------------
// Harnack lower bound check

struct HarnackReport {
    bool pass = false;
    bool monotone_pass = false;
    bool bound_pass = false;
    double worst_margin = 0.0; // min over nodes of v - bound (scaled by ||v||)
    std::size_t worst_node = 0;
    double worst_increase = 0.0; // largest upward jump between nodes
};

/// Check v' <= 0 discretely and the pointwise lower bound
/// v(r) >= ((p-n)/(p-1)) (1-r) r^(n/(p-1)) ||v||_inf, both within tol*||v||.
inline HarnackReport harnack_check(const GridFunction& v, double p, int n, double tol) {
    require(p > static_cast<double>(n), "harnack_check: need p > n");
    HarnackReport rep;
    const std::size_t m = v.size();
    const double norm = sup_norm(v);

    rep.monotone_pass = true;
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double rise = v.values[j + 1] - v.values[j];
        rep.worst_increase = std::max(rep.worst_increase, rise);
        if (rise > tol * (1.0 + norm)) rep.monotone_pass = false;
    }

    rep.bound_pass = true;
    const double factor = (p - static_cast<double>(n)) / (p - 1.0);
    const double expo = static_cast<double>(n) / (p - 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        const double r = static_cast<double>(j) / static_cast<double>(m - 1);
        const double bound = factor * (1.0 - r) * std::pow(r, expo) * norm;
        const double margin = v.values[j] - bound;
        if (margin < worst) {
            worst = margin;
            rep.worst_node = j;
        }
        if (margin < -tol * norm) rep.bound_pass = false;
    }
    rep.worst_margin = worst;
    rep.pass = rep.monotone_pass && rep.bound_pass;
    return rep;
}

// ---------------------------------------------------------------------------
// condition certificates (corner evaluation; the nonlinearities are
// nondecreasing, so corners are the exact extrema)

namespace detail {

inline double denom(const PParams& params, int i) {
    return (params.b - params.a) * std::pow(params.a, params.n - 1) *
           std::pow(1.0 - params.b, params.p(i) - 1.0);
}

} // namespace detail

inline cert::Certificate check_conditions(const RadialProblem& problem, std::array<double, 2> alpha,
                                          std::array<double, 2> beta, const cones::Regime& regime) {
    const PParams& prm = problem.params();
    for (int i = 0; i < 2; ++i)
        require(alpha[i] > 0.0 && beta[i] > 0.0, "check_conditions: alpha and beta must be positive");

    cert::Certificate c;
    c.problem = "plaplacian";
    cert::LevelCertificate level;
    level.alpha = alpha;
    level.beta = beta;
    level.regime = regime;
    level.expected_index = cones::expected_index(regime);
    for (int i = 0; i < 2; ++i) {
        level.r[i] = std::min(alpha[i], beta[i]);
        level.R[i] = std::max(alpha[i], beta[i]);
    }

    const std::array<double, 2> c12{prm.c(0), prm.c(1)};
    const bool e1 = regime.tag[0] == cones::ComponentRegime::Expansive;
    const bool e2 = regime.tag[1] == cones::ComponentRegime::Expansive;

    // Regime-dependent section ordering; failures are structural records.
    for (int i = 0; i < 2; ++i) {
        const bool expansive = i == 0 ? e1 : e2;
        cert::StructuralRecord ord;
        std::ostringstream os;
        if (expansive) {
            ord.name = "ordering: alpha" + std::to_string(i + 1) + " < beta" + std::to_string(i + 1);
            ord.pass = alpha[i] < beta[i];
            os << "alpha=" << alpha[i] << ", beta=" << beta[i];
        } else {
            ord.name = "ordering: beta" + std::to_string(i + 1) + "/c" + std::to_string(i + 1) + " < alpha" +
                       std::to_string(i + 1);
            ord.pass = beta[i] / c12[i] < alpha[i];
            os << "beta/c=" << beta[i] / c12[i] << ", alpha=" << alpha[i];
        }
        ord.detail = os.str();
        level.structural.push_back(std::move(ord));
    }

    // Corner arguments of the four inequalities by regime pattern. The
    // neighbor of a compressive component enters at its own lower corner,
    // the neighbor of an expansive one goes through the c-scaled values.
    const auto& f1 = problem.nonlinearity(0);
    const auto& f2 = problem.nonlinearity(1);
    const double lower1_arg2 = e2 ? c12[1] * alpha[1] : beta[1];
    const double upper1_arg2 = e2 ? beta[1] / c12[1] : alpha[1];
    const double lower2_arg1 = e1 ? c12[0] * alpha[0] : beta[0];
    const double upper2_arg1 = e1 ? beta[0] / c12[0] : alpha[0];

    level.m[0] = f1(beta[0], lower1_arg2);
    level.M[0] = f1(alpha[0], upper1_arg2);
    level.m[1] = f2(lower2_arg1, beta[1]);
    level.M[1] = f2(upper2_arg1, alpha[1]);

    level.inequalities.push_back(cert::check_greater(
        "f1 lower corner > beta1^(p1-1)/((b-a) a^(n-1) (1-b)^(p1-1))", level.m[0],
        std::pow(beta[0], prm.p1 - 1.0) / detail::denom(prm, 0)));
    level.inequalities.push_back(
        cert::check_less("f1 upper corner < alpha1^(p1-1)", level.M[0], std::pow(alpha[0], prm.p1 - 1.0)));
    level.inequalities.push_back(cert::check_greater(
        "f2 lower corner > beta2^(p2-1)/((b-a) a^(n-1) (1-b)^(p2-1))", level.m[1],
        std::pow(beta[1], prm.p2 - 1.0) / detail::denom(prm, 1)));
    level.inequalities.push_back(
        cert::check_less("f2 upper corner < alpha2^(p2-1)", level.M[1], std::pow(alpha[1], prm.p2 - 1.0)));

    level.finalize();
    c.levels.push_back(std::move(level));
    c.grid_meta["N"] = problem.grid_size();
    c.grid_meta["p"] = std::array<double, 2>{prm.p1, prm.p2};
    c.grid_meta["dim"] = prm.n;
    c.grid_meta["window"] = std::array<double, 2>{prm.a, prm.b};
    c.grid_meta["c"] = c12;
    c.finalize();
    return c;
}

// ---------------------------------------------------------------------------
// solver over the phi-section

struct RadialSolutionRecord {
    GridPair u;
    double residual = 0.0;
    std::array<double, 2> norms{};
    std::array<double, 2> phi{};
    std::array<bool, 2> strictly_inside{};
    int iterations = 0;
};

enum class RadialStatus { Converged, NoConvergence, SectionEscape };

struct RadialSolveResult {
    RadialStatus status = RadialStatus::NoConvergence;
    std::optional<RadialSolutionRecord> record;
    int iterations = 0;
};

namespace detail {

// Per-component section bounds. Compressive: inner bounds phi from below,
// outer bounds the norm from above. Expansive swaps the roles: inner bounds
// the norm from below, outer bounds phi from above.
inline double lower_value(const GridFunction& v, bool expansive, double a, double b) {
    return expansive ? sup_norm(v) : cones::phi_min(v, a, b);
}

inline double upper_value(const GridFunction& v, bool expansive, double a, double b) {
    return expansive ? cones::phi_min(v, a, b) : sup_norm(v);
}

} // namespace detail

inline RadialSolveResult solve_radial(const RadialProblem& problem, const cones::PhiSection& section,
                                      GridPair init, double tol, int max_iter,
                                      const cones::Regime& regime = cones::Regime::cc()) {
    require(tol > 0.0, "solve_radial: tol must be positive");
    require(max_iter >= 1, "solve_radial: max_iter must be positive");
    require(init.size() == problem.grid_size(), "solve_radial: init grid size mismatch");
    require(section.a == problem.params().a && section.b == problem.params().b,
            "solve_radial: section window must match the problem window");

    const auto expansive = [&regime](int i) {
        return regime.tag[static_cast<std::size_t>(i)] == cones::ComponentRegime::Expansive;
    };
    for (int i = 0; i < 2; ++i) {
        const double lo = detail::lower_value(init.component(i), expansive(i), section.a, section.b);
        const double hi = detail::upper_value(init.component(i), expansive(i), section.a, section.b);
        require(lo >= section.inner[i] && hi <= section.outer[i],
                "solve_radial: init component " + std::to_string(i + 1) + " is outside the closed section");
    }

    GridPair u = std::move(init);
    for (int it = 1; it <= max_iter; ++it) {
        GridPair v = apply_T_radial(problem, u);
        for (int i = 0; i < 2; ++i) {
            const double hi = detail::upper_value(v.component(i), expansive(i), section.a, section.b);
            if (hi > 1.1 * section.outer[i])
                return RadialSolveResult{RadialStatus::SectionEscape, std::nullopt, it};
        }
        const double step = sup_dist(u, v);
        u = std::move(v);
        if (step < tol) {
            RadialSolutionRecord rec;
            rec.residual = residual_radial(problem, u);
            if (rec.residual >= tol * (1.0 + sup_norm(u))) continue;
            rec.norms = {sup_norm(u.u1), sup_norm(u.u2)};
            rec.phi = {cones::phi_min(u.u1, section.a, section.b), cones::phi_min(u.u2, section.a, section.b)};
            for (int i = 0; i < 2; ++i) {
                const double lo = detail::lower_value(u.component(i), expansive(i), section.a, section.b);
                const double hi = detail::upper_value(u.component(i), expansive(i), section.a, section.b);
                rec.strictly_inside[i] = lo > section.inner[i] && hi < section.outer[i];
            }
            rec.iterations = it;
            rec.u = std::move(u);
            return RadialSolveResult{RadialStatus::Converged, std::move(rec), it};
        }
    }
    return RadialSolveResult{RadialStatus::NoConvergence, std::nullopt, max_iter};
}

} // namespace conefp::plaplacian

#endif // CONEFP_PLAPLACIAN_HPP
