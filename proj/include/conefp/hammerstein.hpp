#ifndef CONEFP_HAMMERSTEIN_HPP
#define CONEFP_HAMMERSTEIN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "conefp/boxopt.hpp"
#include "conefp/certificate.hpp"
#include "conefp/cones.hpp"
#include "conefp/expr.hpp"
#include "conefp/grid.hpp"
#include "conefp/quadrature.hpp"

namespace conefp::hammerstein {

// ---------------------------------------------------------------------------
// kernel specification
//
// The integral operator acts as
//
//                  / 1
//   T_i(u1,u2)(t) = |  k_i(t,s) g_i(s) f_i(u1(s),u2(s)) ds,
//                  / 0
//
// with the kernel dominated by Phi on all of [0,1]^2 and bounded below by
// c*Phi for t inside the window [a,b].

enum class KernelKind { GreenDirichlet, Expression, Tabulated };
enum class ScalarKind { One, Expression, Tabulated };

namespace detail {

inline double table_lookup_1d(const std::vector<double>& table, double s) {
    const std::size_t n = table.size();
    if (n == 1) return table[0];
    const double x = std::clamp(s, 0.0, 1.0) * static_cast<double>(n - 1);
    const std::size_t j = std::min(static_cast<std::size_t>(x), n - 2);
    const double w = x - static_cast<double>(j);
    return (1.0 - w) * table[j] + w * table[j + 1];
}

inline double table_lookup_2d(const std::vector<std::vector<double>>& table, double t, double s) {
    const std::size_t n = table.size();
    if (n == 1) return table_lookup_1d(table[0], s);
    const double x = std::clamp(t, 0.0, 1.0) * static_cast<double>(n - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(x), n - 2);
    const double wi = x - static_cast<double>(i);
    const double lo = table_lookup_1d(table[i], s);
    const double hi = table_lookup_1d(table[i + 1], s);
    return (1.0 - wi) * lo + wi * hi;
}

} // namespace detail

struct KernelSpec {
    KernelKind kind = KernelKind::GreenDirichlet;
    expr::Ast kernel_expr;                    // variables (t, s)
    std::vector<std::vector<double>> table;   // uniform grid on [0,1]^2

    ScalarKind weight_kind = ScalarKind::One; // g_i
    expr::Ast weight_expr;                    // variable s
    std::vector<double> weight_table;

    ScalarKind phi_kind = ScalarKind::One;    // Phi_i
    expr::Ast phi_expr;                       // variable s
    std::vector<double> phi_table;

    double a = 0.25, b = 0.75; // window [a,b] in (0,1)
    double c = 0.25;           // cone constant in (0,1]

    double k(double t, double s) const {
        switch (kind) {
        case KernelKind::GreenDirichlet:
            return s <= t ? s * (1.0 - t) : t * (1.0 - s);
        case KernelKind::Expression:
            return expr::eval_signed(kernel_expr, t, s);
        case KernelKind::Tabulated:
            return detail::table_lookup_2d(table, t, s);
        }
        return 0.0;
    }

    double g(double s) const {
        switch (weight_kind) {
        case ScalarKind::One: return 1.0;
        case ScalarKind::Expression: return expr::eval_signed(weight_expr, s, 0.0);
        case ScalarKind::Tabulated: return detail::table_lookup_1d(weight_table, s);
        }
        return 1.0;
    }

    double phi(double s) const {
        switch (phi_kind) {
        case ScalarKind::One: return 1.0;
        case ScalarKind::Expression: return expr::eval_signed(phi_expr, s, 0.0);
        case ScalarKind::Tabulated: return detail::table_lookup_1d(phi_table, s);
        }
        return 1.0;
    }

    void validate() const {
        require(0.0 < a && a < b && b < 1.0, "KernelSpec: window must satisfy 0 < a < b < 1");
        require(c > 0.0 && c <= 1.0, "KernelSpec: cone constant must lie in (0,1]");
        if (kind == KernelKind::Tabulated)
            require(table.size() >= 2, "KernelSpec: tabulated kernel needs at least a 2x2 grid");
    }

    /// Green's function of -u'' with Dirichlet conditions, together with the
    /// standard Phi(s) = s(1-s) bound and c = min(a, 1-b).
    static KernelSpec green_dirichlet(double a = 0.25, double b = 0.75) {
        KernelSpec spec;
        spec.kind = KernelKind::GreenDirichlet;
        spec.a = a;
        spec.b = b;
        spec.c = std::min(a, 1.0 - b);
        spec.phi_kind = ScalarKind::Expression;
        spec.phi_expr = expr::parse("s*(1-s)", {"s", "t"});
        spec.validate();
        return spec;
    }
};

// ---------------------------------------------------------------------------
// sampled verification of the kernel hypotheses

struct H3Report {
    bool pass = true;
    int samples = 0;
    double phi_weight_integral = 0.0; // integral of Phi*g over the window
    std::vector<std::string> violations;

    void add(std::string what) {
        pass = false;
        if (violations.size() < 8) violations.push_back(std::move(what));
    }
};

/// Check (H1)-(H3) on a uniform verification grid: k >= 0, g >= 0,
/// k(t,s) <= Phi(s) everywhere, c*Phi(s) <= k(t,s) for t in the window, and
/// the window integral of Phi*g positive. Sampled, not rigorous.
inline H3Report verify_h3(const KernelSpec& spec, int samples = 129) {
    spec.validate();
    H3Report rep;
    rep.samples = samples;
    const auto node = [samples](int j) { return static_cast<double>(j) / static_cast<double>(samples - 1); };
    for (int i = 0; i < samples; ++i) {
        const double t = node(i);
        for (int j = 0; j < samples; ++j) {
            const double s = node(j);
            const double k = spec.k(t, s);
            const double phi = spec.phi(s);
            const double tol = 1e-12 * (1.0 + std::fabs(phi));
            if (!std::isfinite(k)) {
                rep.add("kernel non-finite at (t,s)=(" + std::to_string(t) + "," + std::to_string(s) + ")");
                continue;
            }
            if (k < -tol)
                rep.add("kernel negative at (t,s)=(" + std::to_string(t) + "," + std::to_string(s) + ")");
            if (k > phi + tol)
                rep.add("k(t,s) > Phi(s) at (t,s)=(" + std::to_string(t) + "," + std::to_string(s) + ")");
            if (t >= spec.a && t <= spec.b && spec.c * phi > k + tol)
                rep.add("c*Phi(s) > k(t,s) inside the window at (t,s)=(" + std::to_string(t) + "," +
                        std::to_string(s) + ")");
        }
    }
    for (int j = 0; j < samples; ++j) {
        const double s = node(j);
        if (spec.g(s) < 0.0) rep.add("weight g negative at s=" + std::to_string(s));
    }
    rep.phi_weight_integral =
        quad::simpson([&spec](double s) { return spec.phi(s) * spec.g(s); }, spec.a, spec.b, 257);
    if (!(rep.phi_weight_integral > 0.0))
        rep.add("window integral of Phi*g is not positive");
    return rep;
}

// ---------------------------------------------------------------------------
// kernel constants
//
//   A = inf over t in [a,b] of the window integral of k(t,.)g,
//   B = sup over t in [0,1] of the full integral of k(t,.)g,
//
// with inf/sup replaced by min/max over quad_n uniform t-samples and the
// s-integrals done by composite Simpson split at the diagonal kink s = t.

struct KernelConstants {
    double A = 0.0;
    double B = 0.0;
    H3Report h3;
    int quad_n = 0;
    int t_samples = 0;
};

inline KernelConstants kernel_constants(const KernelSpec& spec, int quad_n = 1025) {
    require(quad_n >= 9 && quad_n % 2 == 1, "kernel_constants: quad_n must be odd and at least 9");
    spec.validate();
    KernelConstants out;
    out.quad_n = quad_n;
    out.t_samples = quad_n;
    out.h3 = verify_h3(spec);

    const auto integrate = [&spec, quad_n](double t, double lo, double hi) {
        const double v = quad::simpson_split(
            [&spec, t](double s) { return spec.k(t, s) * spec.g(s); }, lo, hi, t, static_cast<std::size_t>(quad_n));
        if (!std::isfinite(v))
            throw std::runtime_error("kernel_constants: non-finite integrand");
        return v;
    };

    out.A = std::numeric_limits<double>::infinity();
    for (int i = 0; i < quad_n; ++i) {
        const double t = spec.a + (spec.b - spec.a) * static_cast<double>(i) / static_cast<double>(quad_n - 1);
        out.A = std::min(out.A, integrate(t, spec.a, spec.b));
    }
    out.B = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < quad_n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(quad_n - 1);
        out.B = std::max(out.B, integrate(t, 0.0, 1.0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// problem definition

struct NonlinearitySpec {
    std::function<double(double, double)> f;
    boxopt::MonotoneTags tags;
    std::optional<expr::Ast> source;

    double operator()(double x, double y) const {
        const double v = f(x, y);
        if (!std::isfinite(v) || v < 0.0)
            throw expr::EvalError("nonlinearity must be finite and nonnegative");
        return v;
    }

    static NonlinearitySpec from_expression(const std::string& text,
                                            boxopt::MonotoneTags tags = boxopt::MonotoneTags::none()) {
        NonlinearitySpec spec;
        expr::Ast ast = expr::parse(text);
        spec.f = [ast](double x, double y) { return expr::eval(ast, x, y); };
        spec.tags = tags;
        spec.source = std::move(ast);
        return spec;
    }

    static NonlinearitySpec from_function(std::function<double(double, double)> fn,
                                          boxopt::MonotoneTags tags = boxopt::MonotoneTags::none()) {
        NonlinearitySpec spec;
        spec.f = std::move(fn);
        spec.tags = tags;
        return spec;
    }
};

/// Two-component Hammerstein system on the uniform grid. The quadrature
/// weights W_i[t][s] (split composite Simpson per row, kink at s = t) are
/// precomputed so that applying T is a pair of matrix-vector products.
class HammersteinProblem {
public:
    HammersteinProblem(KernelSpec k1, KernelSpec k2, NonlinearitySpec f1, NonlinearitySpec f2,
                       std::size_t grid_n = 257)
        : kernels_{std::move(k1), std::move(k2)}, fs_{std::move(f1), std::move(f2)}, n_(grid_n) {
        kernels_[0].validate();
        kernels_[1].validate();
        require(kernels_[0].a == kernels_[1].a && kernels_[0].b == kernels_[1].b,
                "HammersteinProblem: kernels must share the window [a,b]");
        require(n_ >= 5, "HammersteinProblem: grid needs at least 5 nodes");
        build_weights();
    }

    std::size_t grid_size() const { return n_; }
    double window_a() const { return kernels_[0].a; }
    double window_b() const { return kernels_[0].b; }
    const KernelSpec& kernel(int i) const { return kernels_[static_cast<std::size_t>(i)]; }
    const NonlinearitySpec& nonlinearity(int i) const { return fs_[static_cast<std::size_t>(i)]; }
    double cone_c(int i) const { return kernels_[static_cast<std::size_t>(i)].c; }

    GridPair apply_T(const GridPair& u) const {
        require(u.size() == n_, "apply_T: grid size mismatch");
        require(nonnegative(u.u1) && nonnegative(u.u2), "apply_T: input must be nonnegative");
        return apply_T_unchecked(u);
    }

    double residual(const GridPair& u) const {
        require(u.size() == n_, "residual: grid size mismatch");
        const GridPair Tu = apply_T_clamped(u);
        return sup_dist(u, Tu);
    }

    /// T evaluated with nodal values clamped to the cone; used by the Newton
    /// solver whose iterates may leave R_+ transiently.
    GridPair apply_T_clamped(const GridPair& u) const {
        GridPair v = u;
        for (double& x : v.u1.values) x = std::max(x, 0.0);
        for (double& x : v.u2.values) x = std::max(x, 0.0);
        return apply_T_unchecked(v);
    }

    /// Row-major quadrature weight matrix of component i: W[t*N + s] already
    /// contains the split-Simpson weight times k_i(t,s) g_i(s).
    const std::vector<double>& weight_matrix(int i) const { return weights_[static_cast<std::size_t>(i)]; }

private:
    GridPair apply_T_unchecked(const GridPair& u) const {
        GridPair out{GridFunction(n_), GridFunction(n_)};
        std::vector<double> fv(n_);
        for (int i = 0; i < 2; ++i) {
            for (std::size_t js = 0; js < n_; ++js)
                fv[js] = fs_[static_cast<std::size_t>(i)](u.u1.values[js], u.u2.values[js]);
            const std::vector<double>& W = weights_[static_cast<std::size_t>(i)];
            GridFunction& o = out.component(i);
            for (std::size_t jt = 0; jt < n_; ++jt) {
                double acc = 0.0;
                const double* row = W.data() + jt * n_;
                for (std::size_t js = 0; js < n_; ++js) acc += row[js] * fv[js];
                o.values[jt] = acc;
            }
        }
        return out;
    }

    void build_weights() {
        const double h = 1.0 / static_cast<double>(n_ - 1);
        for (int i = 0; i < 2; ++i) {
            std::vector<double>& W = weights_[static_cast<std::size_t>(i)];
            W.assign(n_ * n_, 0.0);
            for (std::size_t jt = 0; jt < n_; ++jt) {
                const double t = static_cast<double>(jt) * h;
                const auto left = quad::composite_weights(jt, h);
                const auto right = quad::composite_weights(n_ - 1 - jt, h);
                double* row = W.data() + jt * n_;
                for (std::size_t js = 0; js < left.size(); ++js) row[js] += left[js];
                for (std::size_t js = 0; js < right.size(); ++js) row[jt + js] += right[js];
                for (std::size_t js = 0; js < n_; ++js) {
                    const double s = static_cast<double>(js) * h;
                    row[js] *= kernels_[static_cast<std::size_t>(i)].k(t, s) *
                               kernels_[static_cast<std::size_t>(i)].g(s);
                }
            }
        }
    }

    std::array<KernelSpec, 2> kernels_;
    std::array<NonlinearitySpec, 2> fs_;
    std::size_t n_;
    std::array<std::vector<double>, 2> weights_;
};

// ---------------------------------------------------------------------------
// box extrema m_i, M_i
//
//   m_1 = min f_1 over [c_1 b_1, b_1] x [c_2 r_2, R_2],
//   m_2 = min f_2 over [c_1 r_1, R_1] x [c_2 b_2, b_2],
//   M_1 = max f_1 over [0, a_1] x [0, R_2],
//   M_2 = max f_2 over [0, R_1] x [0, a_2],
//
// with r_i = min(alpha_i, beta_i), R_i = max(alpha_i, beta_i). Nondecreasing
// tags collapse each extremum to a corner evaluation.

struct BoxExtrema {
    std::array<double, 2> m{}, M{};
};

inline BoxExtrema compute_mM(const HammersteinProblem& problem, std::array<double, 2> alpha,
                             std::array<double, 2> beta, int grid_n = boxopt::kDefaultGridN,
                             std::uint64_t seed = 0) {
    for (int i = 0; i < 2; ++i) {
        require(alpha[i] > 0.0 && beta[i] > 0.0, "compute_mM: alpha and beta must be positive");
        require(alpha[i] != beta[i], "compute_mM: alpha_i must differ from beta_i");
    }
    const std::array<double, 2> r{std::min(alpha[0], beta[0]), std::min(alpha[1], beta[1])};
    const std::array<double, 2> R{std::max(alpha[0], beta[0]), std::max(alpha[1], beta[1])};
    const double c1 = problem.cone_c(0), c2 = problem.cone_c(1);
    const auto& f1 = problem.nonlinearity(0);
    const auto& f2 = problem.nonlinearity(1);

    BoxExtrema out;
    out.m[0] = boxopt::box_min(f1.f, boxopt::Rect(c1 * beta[0], beta[0], c2 * r[1], R[1]), f1.tags, grid_n, seed);
    out.m[1] = boxopt::box_min(f2.f, boxopt::Rect(c1 * r[0], R[0], c2 * beta[1], beta[1]), f2.tags, grid_n, seed);
    out.M[0] = boxopt::box_max(f1.f, boxopt::Rect(0.0, alpha[0], 0.0, R[1]), f1.tags, grid_n, seed);
    out.M[1] = boxopt::box_max(f2.f, boxopt::Rect(0.0, R[0], 0.0, alpha[1]), f2.tags, grid_n, seed);
    return out;
}

// ---------------------------------------------------------------------------
// certificates

struct CertOptions {
    int quad_n = 1025;
    int box_grid_n = boxopt::kDefaultGridN;
    int h3_samples = 129;
    std::uint64_t seed = 0;
};

namespace detail {

inline cert::LevelCertificate build_level(const HammersteinProblem& problem,
                                          const std::array<double, 2>& A, const std::array<double, 2>& B,
                                          std::array<double, 2> alpha, std::array<double, 2> beta,
                                          const CertOptions& opt, const std::string& tag) {
    cert::LevelCertificate level;
    level.alpha = alpha;
    level.beta = beta;
    for (int i = 0; i < 2; ++i) {
        level.r[i] = std::min(alpha[i], beta[i]);
        level.R[i] = std::max(alpha[i], beta[i]);
        level.regime.tag[static_cast<std::size_t>(i)] = beta[i] < alpha[i]
                                                            ? cones::ComponentRegime::Compressive
                                                            : cones::ComponentRegime::Expansive;
    }
    level.expected_index = cones::expected_index(level.regime);
    const BoxExtrema ext = compute_mM(problem, alpha, beta, opt.box_grid_n, opt.seed);
    level.m = ext.m;
    level.M = ext.M;
    for (int i = 0; i < 2; ++i) {
        const std::string si = std::to_string(i + 1);
        level.inequalities.push_back(
            cert::check_greater("A" + si + "*m" + si + tag + " > beta" + si + tag, A[i] * ext.m[i], beta[i]));
        level.inequalities.push_back(
            cert::check_less("B" + si + "*M" + si + tag + " < alpha" + si + tag, B[i] * ext.M[i], alpha[i]));
    }
    level.finalize();
    return level;
}

inline void add_h3_records(cert::Certificate& c, const std::array<KernelConstants, 2>& kc) {
    for (int i = 0; i < 2; ++i) {
        cert::StructuralRecord rec;
        rec.name = "H1-H3 kernel " + std::to_string(i + 1);
        rec.pass = kc[static_cast<std::size_t>(i)].h3.pass;
        if (!rec.pass) {
            std::ostringstream os;
            for (const auto& v : kc[static_cast<std::size_t>(i)].h3.violations) os << v << "; ";
            rec.detail = os.str();
        }
        c.structural.push_back(std::move(rec));
    }
}

inline void fill_grid_meta(cert::Certificate& c, const HammersteinProblem& problem,
                           const std::array<KernelConstants, 2>& kc, const CertOptions& opt) {
    c.grid_meta["N"] = problem.grid_size();
    c.grid_meta["quad_n"] = opt.quad_n;
    c.grid_meta["t_samples"] = opt.quad_n;
    c.grid_meta["box_grid_n"] = opt.box_grid_n;
    c.grid_meta["h3_samples"] = opt.h3_samples;
    c.grid_meta["A"] = std::array<double, 2>{kc[0].A, kc[1].A};
    c.grid_meta["B"] = std::array<double, 2>{kc[0].B, kc[1].B};
    c.grid_meta["extrema_sampled"] = !(problem.nonlinearity(0).tags.all_nondecreasing() &&
                                       problem.nonlinearity(1).tags.all_nondecreasing());
}

} // namespace detail

/// Existence certificate: the four inequalities A_i m_i > beta_i and
/// B_i M_i < alpha_i, plus the kernel hypothesis report. A passing
/// certificate localizes a solution with r_i < ||u_i|| < R_i.
inline cert::Certificate check_existence(const HammersteinProblem& problem, std::array<double, 2> alpha,
                                         std::array<double, 2> beta, CertOptions opt = {}) {
    cert::Certificate c;
    c.problem = "hammerstein";
    const std::array<KernelConstants, 2> kc{kernel_constants(problem.kernel(0), opt.quad_n),
                                            kernel_constants(problem.kernel(1), opt.quad_n)};
    c.levels.push_back(detail::build_level(problem, {kc[0].A, kc[1].A}, {kc[0].B, kc[1].B}, alpha, beta, opt, ""));
    detail::add_h3_records(c, kc);
    detail::fill_grid_meta(c, problem, kc, opt);
    c.finalize();
    return c;
}

struct ParameterLevel {
    std::array<double, 2> alpha{}, beta{};
};

/// Three-level multiplicity certificate: twelve inequality records plus the
/// nesting check (levels 1 and 2 inside level 3's box) and the disjointness
/// check (some component separates levels 1 and 2). A passing certificate
/// guarantees three distinct solutions, the third in the set difference.
inline cert::Certificate check_multiplicity(const HammersteinProblem& problem,
                                            const std::array<ParameterLevel, 3>& levels, CertOptions opt = {}) {
    cert::Certificate c;
    c.problem = "hammerstein";
    const std::array<KernelConstants, 2> kc{kernel_constants(problem.kernel(0), opt.quad_n),
                                            kernel_constants(problem.kernel(1), opt.quad_n)};
    for (int j = 0; j < 3; ++j)
        c.levels.push_back(detail::build_level(problem, {kc[0].A, kc[1].A}, {kc[0].B, kc[1].B},
                                               levels[static_cast<std::size_t>(j)].alpha,
                                               levels[static_cast<std::size_t>(j)].beta, opt,
                                               "^" + std::to_string(j + 1)));

    cert::StructuralRecord nesting;
    nesting.name = "nesting: levels 1,2 inside level 3";
    nesting.pass = true;
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            const auto& lvl = c.levels[static_cast<std::size_t>(j)];
            const auto& outer = c.levels[2];
            for (double v : {lvl.alpha[i], lvl.beta[i]}) {
                if (v < outer.r[i] || v > outer.R[i]) {
                    nesting.pass = false;
                    std::ostringstream os;
                    os << "level " << (j + 1) << " parameter " << v << " outside [r" << (i + 1) << "^3, R"
                       << (i + 1) << "^3] = [" << outer.r[i] << ", " << outer.R[i] << "]";
                    nesting.detail = os.str();
                }
            }
        }
    }
    c.structural.push_back(nesting);

    cert::StructuralRecord disjoint;
    disjoint.name = "disjointness: R_i^1 < r_i^2 for some i";
    disjoint.pass = c.levels[0].R[0] < c.levels[1].r[0] || c.levels[0].R[1] < c.levels[1].r[1];
    if (!disjoint.pass) disjoint.detail = "levels 1 and 2 overlap in both components";
    c.structural.push_back(disjoint);

    detail::add_h3_records(c, kc);
    detail::fill_grid_meta(c, problem, kc, opt);
    c.finalize();
    return c;
}

// ---------------------------------------------------------------------------
// solvers

enum class SolveStatus { Converged, NoConvergence, BoxEscape, NotFound };
enum class Method { Picard, DeflatedNewton };

struct SolutionRecord {
    GridPair u;
    double residual = 0.0;
    std::array<double, 2> norms{};
    std::array<bool, 2> strictly_inside{}; // r_i < ||u_i|| < R_i
    Method method = Method::Picard;
    int iterations = 0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::NoConvergence;
    std::optional<SolutionRecord> record;
    int iterations = 0;
};

namespace detail {

inline SolutionRecord make_record(const HammersteinProblem& problem, GridPair u, const cones::ConeBox& box,
                                  Method method, int iterations) {
    SolutionRecord rec;
    rec.residual = problem.residual(u);
    rec.norms = {sup_norm(u.u1), sup_norm(u.u2)};
    for (int i = 0; i < 2; ++i)
        rec.strictly_inside[i] = box.inner[i] < rec.norms[i] && rec.norms[i] < box.outer[i];
    rec.method = method;
    rec.iterations = iterations;
    rec.u = std::move(u);
    return rec;
}

} // namespace detail

/// Picard iteration u <- T(u) confined to the box: components that fall
/// below the inner radius are retracted back onto the inner sphere, and an
/// excursion more than 10% above the outer radius aborts with BoxEscape
/// (under a compressive certificate, outward escape is a real failure
/// signal, not noise).
inline SolveResult solve_picard(const HammersteinProblem& problem, const cones::ConeBox& box, GridPair init,
                                double tol, int max_iter) {
    require(tol > 0.0, "solve_picard: tol must be positive");
    require(max_iter >= 1, "solve_picard: max_iter must be positive");
    require(init.size() == problem.grid_size(), "solve_picard: init grid size mismatch");
    for (int i = 0; i < 2; ++i) {
        const double nu = sup_norm(init.component(i));
        require(nu >= box.inner[i] && nu <= box.outer[i],
                "solve_picard: init component " + std::to_string(i + 1) + " is outside the closed box");
    }

    const GridFunction ones = cones::ones_like(init.u1);
    GridPair u = std::move(init);
    for (int it = 1; it <= max_iter; ++it) {
        GridPair v = problem.apply_T(u);
        for (int i = 0; i < 2; ++i) {
            const double nv = sup_norm(v.component(i));
            if (nv > 1.1 * box.outer[i])
                return SolveResult{SolveStatus::BoxEscape, std::nullopt, it};
            if (nv < box.inner[i])
                v.component(i) = cones::retract_component(v.component(i), box.inner[i], box.outer[i], ones);
        }
        const double step = sup_dist(u, v);
        u = std::move(v);
        if (step < tol) {
            const double res = problem.residual(u);
            if (res < tol * (1.0 + sup_norm(u)))
                return SolveResult{SolveStatus::Converged,
                                   detail::make_record(problem, std::move(u), box, Method::Picard, it), it};
            // step stalled without solving u = T(u): keep iterating; the
            // retraction can pin iterates to the inner sphere.
        }
    }
    return SolveResult{SolveStatus::NoConvergence, std::nullopt, max_iter};
}

struct NewtonOptions {
    int max_newton_iter = 60;
    int max_backtracks = 25;
    double min_separation = 1e-6; // distinctness radius against known solutions
    double fd_step = 1e-6;
    int warmup_iters = 6;        // norm-pinned shape iterations before Newton
    int alternation_sweeps = 14; // component-wise Newton sweeps (phase 2)
    int pin_ladder = 9;          // amplitude samples for the continuation scan
    int pin_bisect = 52;         // bisection steps per sign bracket (phase 3)
};

namespace detail {

/// Residual F(u) = u - T(u) stacked as a 2N vector.
inline Eigen::VectorXd stack_residual(const HammersteinProblem& problem, const GridPair& u) {
    const std::size_t n = problem.grid_size();
    const GridPair Tu = problem.apply_T_clamped(u);
    Eigen::VectorXd F(2 * static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        F(static_cast<Eigen::Index>(j)) = u.u1.values[j] - Tu.u1.values[j];
        F(static_cast<Eigen::Index>(n + j)) = u.u2.values[j] - Tu.u2.values[j];
    }
    return F;
}

/// Jacobian of F by finite differences on the nodal values of f_i. Because
/// T_i(u)(t) = sum_s W_i[t][s] f_i(u1(s), u2(s)), each column of dT only
/// needs d f_i / d u_j at one node:
///   dF[(i,t),(j,s)] = delta_ij delta_ts - W_i[t][s] * df_i/du_j (s).
inline Eigen::MatrixXd stack_jacobian(const HammersteinProblem& problem, const GridPair& u,
                                      const std::array<std::vector<double>, 2>& W, double fd_step) {
    const std::size_t n = problem.grid_size();
    const Eigen::Index m = 2 * static_cast<Eigen::Index>(n);
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(m, m);
    std::array<std::vector<double>, 4> df; // df[i*2+j][s]
    for (auto& v : df) v.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        const double x = std::max(u.u1.values[s], 0.0);
        const double y = std::max(u.u2.values[s], 0.0);
        for (int i = 0; i < 2; ++i) {
            const auto& f = problem.nonlinearity(i).f;
            const double hx = fd_step * (1.0 + std::fabs(x));
            const double hy = fd_step * (1.0 + std::fabs(y));
            // one-sided at the boundary of R_+ so f is never probed below 0
            const double fx = (x >= hx) ? (f(x + hx, y) - f(x - hx, y)) / (2.0 * hx)
                                        : (f(x + hx, y) - f(x, y)) / hx;
            const double fy = (y >= hy) ? (f(x, y + hy) - f(x, y - hy)) / (2.0 * hy)
                                        : (f(x, y + hy) - f(x, y)) / hy;
            df[static_cast<std::size_t>(i * 2)][s] = fx;
            df[static_cast<std::size_t>(i * 2 + 1)][s] = fy;
        }
    }
    for (int i = 0; i < 2; ++i) {
        const std::vector<double>& Wi = W[static_cast<std::size_t>(i)];
        for (std::size_t t = 0; t < n; ++t) {
            const double* row = Wi.data() + t * n;
            for (std::size_t s = 0; s < n; ++s) {
                J(static_cast<Eigen::Index>(i) * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(t),
                  static_cast<Eigen::Index>(s)) -= row[s] * df[static_cast<std::size_t>(i * 2)][s];
                J(static_cast<Eigen::Index>(i) * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(t),
                  static_cast<Eigen::Index>(n + s)) -= row[s] * df[static_cast<std::size_t>(i * 2 + 1)][s];
            }
        }
    }
    return J;
}

inline double deflation_factor(const GridPair& u, const std::vector<GridPair>& known) {
    double m = 1.0;
    for (const auto& k : known) {
        const double d = sup_dist(u, k);
        m *= 1.0 / (d * d + 1e-300) + 1.0;
    }
    return m;
}

inline GridPair bump_seed(std::size_t n, double norm1, double norm2) {
    GridFunction shape = GridFunction::sample(n, [](double t) { return 4.0 * t * (1.0 - t); });
    GridFunction a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
        a.values[j] = norm1 * shape.values[j];
        b.values[j] = norm2 * shape.values[j];
    }
    return GridPair(std::move(a), std::move(b));
}

/// A few Picard sweeps with both component norms pinned: the iterate keeps
/// the requested amplitudes but adopts the operator's natural profiles.
inline GridPair shape_warmup(const HammersteinProblem& problem, std::size_t n, double norm1, double norm2,
                             int iters) {
    GridPair u = bump_seed(n, norm1, norm2);
    for (int k = 0; k < iters; ++k) {
        GridPair v = problem.apply_T_clamped(u);
        const double s1 = sup_norm(v.u1);
        const double s2 = sup_norm(v.u2);
        if (s1 <= 0.0 || s2 <= 0.0) break;
        for (std::size_t j = 0; j < n; ++j) {
            u.u1.values[j] = v.u1.values[j] * (norm1 / s1);
            u.u2.values[j] = v.u2.values[j] * (norm2 / s2);
        }
    }
    return u;
}

/// Damped Newton on a single component with the other frozen. Returns true
/// when the component residual drops below tol.
inline bool single_component_newton(const HammersteinProblem& problem, GridPair& u, int ci, double tol,
                                    int max_iter, double fd_step) {
    const std::size_t n = problem.grid_size();
    const std::vector<double>& W = problem.weight_matrix(ci);
    const auto& f = problem.nonlinearity(ci).f;
    for (int it = 0; it < max_iter; ++it) {
        const GridPair Tu = problem.apply_T_clamped(u);
        const GridFunction& ui = u.component(ci);
        const GridFunction& Ti = Tu.component(ci);
        Eigen::VectorXd F(static_cast<Eigen::Index>(n));
        double fn = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            F(static_cast<Eigen::Index>(j)) = ui.values[j] - Ti.values[j];
            fn = std::max(fn, std::fabs(F(static_cast<Eigen::Index>(j))));
        }
        if (fn < tol) return true;
        Eigen::MatrixXd J = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t s = 0; s < n; ++s) {
            const double x = std::max(u.u1.values[s], 0.0);
            const double y = std::max(u.u2.values[s], 0.0);
            double d;
            if (ci == 0) {
                const double h = fd_step * (1.0 + std::fabs(x));
                d = x >= h ? (f(x + h, y) - f(x - h, y)) / (2.0 * h) : (f(x + h, y) - f(x, y)) / h;
            } else {
                const double h = fd_step * (1.0 + std::fabs(y));
                d = y >= h ? (f(x, y + h) - f(x, y - h)) / (2.0 * h) : (f(x, y + h) - f(x, y)) / h;
            }
            for (std::size_t t = 0; t < n; ++t)
                J(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) -= W[t * n + s] * d;
        }
        const Eigen::VectorXd dir = J.partialPivLu().solve(-F);
        if (!dir.allFinite()) return false;
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 30; ++bt) {
            GridPair trial = u;
            GridFunction& ti = trial.component(ci);
            for (std::size_t j = 0; j < n; ++j) ti.values[j] += lambda * dir(static_cast<Eigen::Index>(j));
            const GridPair Tt = problem.apply_T_clamped(trial);
            double ft = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                ft = std::max(ft, std::fabs(ti.values[j] - Tt.component(ci).values[j]));
            if (std::isfinite(ft) && ft < fn) {
                u = std::move(trial);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return false;
    }
    return false;
}

/// Solve the system with the norm of component `pin` held at theta: the
/// pinned component repeatedly adopts the operator profile rescaled to
/// theta while the free component is solved by Newton. Returns the iterate
/// and the unpinned response ||T_pin(u)||; theta is a fixed-point amplitude
/// exactly when response == theta.
struct PinnedSolve {
    GridPair u;
    double response = 0.0;
};

inline PinnedSolve pinned_amplitude_solve(const HammersteinProblem& problem, int pin, double theta,
                                          GridPair start, double inner_tol, double fd_step, int sweeps = 60) {
    const std::size_t n = problem.grid_size();
    GridPair u = std::move(start);
    {
        GridFunction& up = u.component(pin);
        const double s = sup_norm(up);
        if (s > 0.0)
            for (std::size_t j = 0; j < n; ++j) up.values[j] *= theta / s;
        else
            up = GridFunction::sample(n, [theta](double t) { return theta * 4.0 * t * (1.0 - t); });
    }
    const int other = 1 - pin;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        single_component_newton(problem, u, other, inner_tol, 40, fd_step);
        const GridPair Tu = problem.apply_T_clamped(u);
        const double sp = sup_norm(Tu.component(pin));
        if (sp <= 0.0) return {std::move(u), 0.0};
        double drift = 0.0;
        GridFunction& up = u.component(pin);
        for (std::size_t j = 0; j < n; ++j) {
            const double nv = Tu.component(pin).values[j] * (theta / sp);
            drift = std::max(drift, std::fabs(nv - up.values[j]));
            up.values[j] = nv;
        }
        if (drift < 1e-12 * (1.0 + theta) && sweep >= 3) break;
    }
    const GridPair Tu = problem.apply_T_clamped(u);
    return {std::move(u), sup_norm(Tu.component(pin))};
}

} // namespace detail

/// Locate a solution in the box that differs from every known one.
///
/// Three escalating phases, all deterministic:
///   1. damped Newton on the stacked residual F(u) = u - T(u), deflated
///      against known solutions with prod_k (1/||u-u_k||_inf^2 + 1) in the
///      line-search merit, multistarted from 8 corner/geometric-mean/
///      midpoint norm seeds (norm-pinned shape warmup first);
///   2. component-alternation sweeps (single-component Newton each way) for
///      iterates where the cross-coupling makes the full Jacobian stiff;
///   3. amplitude continuation: pin one component's norm at a ladder of
///      levels, solve the rest, and bisect sign changes of the pinned
///      response ||T_i(u)|| - theta. This crosses the fold that separates
///      the trivial branch from coexistence solutions of expansive
///      components, where phases 1-2 stall on near-singular Jacobians.
///
/// Best-effort by construction: NotFound is a legitimate outcome, existence
/// is guaranteed by a passing certificate but not constructively located.
inline SolveResult solve_deflated_newton(const HammersteinProblem& problem, const cones::ConeBox& box,
                                         const std::vector<SolutionRecord>& known, double tol,
                                         NewtonOptions opt = {}) {
    require(tol > 0.0, "solve_deflated_newton: tol must be positive");
    const std::size_t n = problem.grid_size();
    const std::array<std::vector<double>, 2> W{problem.weight_matrix(0), problem.weight_matrix(1)};

    std::vector<GridPair> deflate;
    for (const auto& k : known) deflate.push_back(k.u);

    int total_iters = 0;
    // Accepts a candidate that solves the discrete system inside the box and
    // away from known solutions; otherwise deflates it and keeps searching.
    const auto try_accept = [&](GridPair u) -> std::optional<SolutionRecord> {
        for (double& x : u.u1.values) x = std::max(x, 0.0);
        for (double& x : u.u2.values) x = std::max(x, 0.0);
        if (problem.residual(u) >= tol * (1.0 + sup_norm(u))) return std::nullopt;
        const std::array<double, 2> norms{sup_norm(u.u1), sup_norm(u.u2)};
        bool inside = true;
        for (int i = 0; i < 2; ++i)
            inside = inside && norms[i] >= box.inner[i] && norms[i] <= box.outer[i];
        bool distinct = true;
        for (const auto& k : known)
            distinct = distinct && sup_dist(u, k.u) >= opt.min_separation;
        if (inside && distinct)
            return detail::make_record(problem, std::move(u), box, Method::DeflatedNewton, total_iters);
        deflate.push_back(std::move(u));
        return std::nullopt;
    };

    const double g1 = std::sqrt(box.inner[0] * box.outer[0]);
    const double g2 = std::sqrt(box.inner[1] * box.outer[1]);
    const double m1 = 0.5 * (box.inner[0] + box.outer[0]);
    const double m2 = 0.5 * (box.inner[1] + box.outer[1]);
    const std::array<std::array<double, 2>, 8> seeds{{{g1, g2},
                                                      {box.inner[0], g2},
                                                      {g1, box.inner[1]},
                                                      {m1, g2},
                                                      {g1, m2},
                                                      {box.inner[0], box.inner[1]},
                                                      {m1, m2},
                                                      {box.outer[0], g2}}};

    // --- phase 1: deflated full-system Newton ------------------------------
    for (const auto& seed : seeds) {
        GridPair u = detail::shape_warmup(problem, n, seed[0], seed[1], opt.warmup_iters);
        Eigen::VectorXd F = detail::stack_residual(problem, u);
        double merit = detail::deflation_factor(u, deflate) * F.lpNorm<Eigen::Infinity>();
        bool seed_failed = false;
        for (int it = 0; it < opt.max_newton_iter && !seed_failed; ++it) {
            ++total_iters;
            if (F.lpNorm<Eigen::Infinity>() < tol) break;
            const Eigen::MatrixXd J = detail::stack_jacobian(problem, u, W, opt.fd_step);
            const Eigen::VectorXd dir = J.partialPivLu().solve(-F);
            if (!dir.allFinite()) {
                seed_failed = true;
                break;
            }
            double lambda = 1.0;
            bool accepted = false;
            for (int bt = 0; bt < opt.max_backtracks; ++bt) {
                GridPair trial = u;
                for (std::size_t j = 0; j < n; ++j) {
                    trial.u1.values[j] += lambda * dir(static_cast<Eigen::Index>(j));
                    trial.u2.values[j] += lambda * dir(static_cast<Eigen::Index>(n + j));
                }
                const Eigen::VectorXd Ft = detail::stack_residual(problem, trial);
                const double mt = detail::deflation_factor(trial, deflate) * Ft.lpNorm<Eigen::Infinity>();
                if (std::isfinite(mt) && mt < merit * (1.0 - 0.25 * lambda)) {
                    u = std::move(trial);
                    F = Ft;
                    merit = mt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted) seed_failed = true;
        }
        if (seed_failed || F.lpNorm<Eigen::Infinity>() >= tol) continue;
        if (auto rec = try_accept(std::move(u)))
            return SolveResult{SolveStatus::Converged, std::move(rec), total_iters};
    }

    // --- phase 2: component alternation ------------------------------------
    for (const auto& seed : {seeds[0], seeds[1], seeds[2], seeds[6]}) {
        GridPair u = detail::shape_warmup(problem, n, seed[0], seed[1], opt.warmup_iters);
        for (int sweep = 0; sweep < opt.alternation_sweeps; ++sweep) {
            ++total_iters;
            const double inner_tol = 0.1 * tol * (1.0 + sup_norm(u));
            detail::single_component_newton(problem, u, 1, inner_tol, 25, opt.fd_step);
            detail::single_component_newton(problem, u, 0, inner_tol, 25, opt.fd_step);
            if (problem.residual(u) < tol * (1.0 + sup_norm(u))) break;
        }
        if (auto rec = try_accept(std::move(u)))
            return SolveResult{SolveStatus::Converged, std::move(rec), total_iters};
    }

    // --- phase 3: pinned-amplitude continuation -----------------------------
    for (int pin = 0; pin < 2; ++pin) {
        const double lo = box.inner[pin];
        const double hi = box.outer[pin];
        const int ladder = std::max(opt.pin_ladder, 3);
        const double other_seed = pin == 0 ? g2 : g1;
        // the bisection's noise floor is set by the inner solves, so they run
        // three digits below the acceptance gate
        const auto inner_tol = [tol](double theta_val) { return 1e-3 * tol * (1.0 + theta_val); };

        GridPair carry =
            detail::shape_warmup(problem, n, pin == 0 ? lo : other_seed, pin == 0 ? other_seed : lo,
                                 opt.warmup_iters);
        std::vector<double> theta(static_cast<std::size_t>(ladder)), gap(static_cast<std::size_t>(ladder));
        std::vector<GridPair> states;
        states.reserve(static_cast<std::size_t>(ladder));
        for (int k = 0; k < ladder; ++k) {
            theta[static_cast<std::size_t>(k)] =
                lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(ladder - 1));
            auto ps = detail::pinned_amplitude_solve(problem, pin, theta[static_cast<std::size_t>(k)], carry,
                                                     inner_tol(theta[static_cast<std::size_t>(k)]), opt.fd_step);
            ++total_iters;
            gap[static_cast<std::size_t>(k)] = ps.response - theta[static_cast<std::size_t>(k)];
            carry = ps.u;
            states.push_back(std::move(ps.u));
        }
        for (int k = 0; k + 1 < ladder; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (gap[ku] == 0.0) {
                if (auto rec = try_accept(states[ku]))
                    return SolveResult{SolveStatus::Converged, std::move(rec), total_iters};
                continue;
            }
            if ((gap[ku] > 0.0) == (gap[ku + 1] > 0.0)) continue;
            double a = theta[ku], b = theta[ku + 1];
            double fa = gap[ku];
            GridPair best = states[ku];
            for (int it = 0; it < opt.pin_bisect; ++it) {
                ++total_iters;
                const double mid = 0.5 * (a + b);
                auto ps = detail::pinned_amplitude_solve(problem, pin, mid, best, inner_tol(mid), opt.fd_step);
                const double fm = ps.response - mid;
                best = std::move(ps.u);
                if ((fm > 0.0) == (fa > 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
                if (b - a < 1e-13 * (1.0 + mid)) break;
            }
            if (auto rec = try_accept(std::move(best)))
                return SolveResult{SolveStatus::Converged, std::move(rec), total_iters};
        }
    }
    return SolveResult{SolveStatus::NotFound, std::nullopt, total_iters};
}

} // namespace conefp::hammerstein

#endif // CONEFP_HAMMERSTEIN_HPP
