#ifndef CONEFP_MIRANDA_HPP
#define CONEFP_MIRANDA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "conefp/common.hpp"

namespace conefp::miranda {

using Point = std::vector<double>;
using VectorField = std::function<Point(const Point&)>;

/// Axis-aligned rectangle [a_1,b_1] x ... x [a_n,b_n].
struct Rectangle {
    Point lower, upper;

    Rectangle(Point a, Point b) : lower(std::move(a)), upper(std::move(b)) {
        require(lower.size() == upper.size() && !lower.empty(), "Rectangle: dimension mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            require(lower[i] < upper[i], "Rectangle: need a_i < b_i in every coordinate");
    }

    std::size_t dim() const { return lower.size(); }

    Point center() const {
        Point c(dim());
        for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
        return c;
    }

    std::size_t longest_edge() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < dim(); ++i)
            if (upper[i] - lower[i] > upper[best] - lower[best]) best = i;
        return best;
    }

    double max_edge() const {
        double m = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) m = std::max(m, upper[i] - lower[i]);
        return m;
    }

    bool contains(const Point& x) const {
        for (std::size_t i = 0; i < dim(); ++i)
            if (x[i] < lower[i] || x[i] > upper[i]) return false;
        return true;
    }

    double scale() const {
        double s = 1.0;
        for (std::size_t i = 0; i < dim(); ++i) s = std::max({s, std::fabs(lower[i]), std::fabs(upper[i])});
        return s;
    }
};

enum class FaceCondition { ConditionA, ConditionB, Fail };

inline const char* face_condition_name(FaceCondition c) {
    switch (c) {
    case FaceCondition::ConditionA: return "A";
    case FaceCondition::ConditionB: return "B";
    case FaceCondition::Fail: return "fail";
    }
    return "?";
}

namespace detail {

// Visit a uniform lattice on the face {x_axis = value}: per_axis points in
// every free coordinate, capped at 1e5 total points by shrinking per_axis.
template <typename Visit>
void visit_face(const Rectangle& rect, std::size_t axis, double value, int per_axis, Visit&& visit) {
    const std::size_t n = rect.dim();
    const std::size_t free_dims = n - 1;
    if (free_dims == 0) {
        Point x(1, value);
        visit(x);
        return;
    }
    int m = std::max(per_axis, 2);
    while (std::pow(static_cast<double>(m), static_cast<double>(free_dims)) > 1e5 && m > 2) --m;
    std::vector<int> idx(free_dims, 0);
    Point x(n);
    x[axis] = value;
    for (;;) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == axis) continue;
            x[i] = rect.lower[i] +
                   (rect.upper[i] - rect.lower[i]) * static_cast<double>(idx[k]) / static_cast<double>(m - 1);
            ++k;
        }
        visit(x);
        std::size_t carry = 0;
        while (carry < free_dims) {
            if (++idx[carry] < m) break;
            idx[carry] = 0;
            ++carry;
        }
        if (carry == free_dims) break;
    }
}

} // namespace detail

namespace detail {

struct FaceScan {
    std::vector<FaceCondition> classes;    // per coordinate
    std::vector<double> comp_min, comp_max; // per component, over all faces + center
};

inline FaceScan scan_faces(const VectorField& g, const Rectangle& rect, int samples_per_face) {
    const std::size_t n = rect.dim();
    const double tol = 1e-12 * rect.scale();
    FaceScan scan;
    scan.classes.assign(n, FaceCondition::Fail);
    scan.comp_min.assign(n, std::numeric_limits<double>::infinity());
    scan.comp_max.assign(n, -std::numeric_limits<double>::infinity());
    const auto absorb = [&scan, n](const Point& v) {
        for (std::size_t c = 0; c < n; ++c) {
            scan.comp_min[c] = std::min(scan.comp_min[c], v[c]);
            scan.comp_max[c] = std::max(scan.comp_max[c], v[c]);
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        double lo_min = std::numeric_limits<double>::infinity();
        double lo_max = -std::numeric_limits<double>::infinity();
        double hi_min = std::numeric_limits<double>::infinity();
        double hi_max = -std::numeric_limits<double>::infinity();
        visit_face(rect, i, rect.lower[i], samples_per_face, [&](const Point& x) {
            const Point v = g(x);
            lo_min = std::min(lo_min, v[i]);
            lo_max = std::max(lo_max, v[i]);
            absorb(v);
        });
        visit_face(rect, i, rect.upper[i], samples_per_face, [&](const Point& x) {
            const Point v = g(x);
            hi_min = std::min(hi_min, v[i]);
            hi_max = std::max(hi_max, v[i]);
            absorb(v);
        });
        const bool cond_a = lo_min >= -tol && hi_max <= tol;
        const bool cond_b = lo_max <= tol && hi_min >= -tol;
        if (cond_a) scan.classes[i] = FaceCondition::ConditionA;
        else if (cond_b) scan.classes[i] = FaceCondition::ConditionB;
    }
    absorb(g(rect.center()));
    return scan;
}

/// A sampled exclusion test: the box certainly holds no zero when some
/// component keeps one strict sign on every sample.
inline bool refuted(const FaceScan& scan, double tol) {
    for (std::size_t c = 0; c < scan.comp_min.size(); ++c)
        if (scan.comp_min[c] > tol || scan.comp_max[c] < -tol) return true;
    return false;
}

} // namespace detail

/// Classify each coordinate against the opposite-face sign conditions:
/// A means g_i >= 0 on {x_i = a_i} and g_i <= 0 on {x_i = b_i}; B is the
/// reverse; Fail when neither pattern holds on the sampled lattice.
inline std::vector<FaceCondition> check_faces(const VectorField& g, const Rectangle& rect,
                                              int samples_per_face = 33) {
    return detail::scan_faces(g, rect, samples_per_face).classes;
}

inline bool all_faces_pass(const std::vector<FaceCondition>& classes) {
    return std::all_of(classes.begin(), classes.end(),
                       [](FaceCondition c) { return c != FaceCondition::Fail; });
}

// ---------------------------------------------------------------------------
// fixed-point <-> zero reductions

struct FixedPointReduction {
    VectorField f;
    double lambda = 1.0;
    double sampled_sup = 0.0; // sampled sup of |g_i| over the rectangle
};

/// Constructive reduction of a Miranda field to a fixed-point problem on a
/// rectangle in the positive orthant: f(x) = lambda g(x) + x with
/// lambda = min_i a_i / (1.1 * sampled sup |g_i|), so f maps the rectangle
/// into R_+^n and zeros of g are exactly fixed points of f.
inline FixedPointReduction pm_to_fixed_point(const VectorField& g, const Rectangle& rect,
                                             int samples_per_face = 33) {
    double a = std::numeric_limits<double>::infinity();
    for (double v : rect.lower) a = std::min(a, v);
    require(a > 0.0, "pm_to_fixed_point: rectangle must lie strictly inside the positive orthant "
                     "(translate first when some a_i <= 0)");

    double sup = 0.0;
    for (std::size_t i = 0; i < rect.dim(); ++i) {
        detail::visit_face(rect, i, rect.lower[i], samples_per_face, [&](const Point& x) {
            for (double v : g(x)) sup = std::max(sup, std::fabs(v));
        });
        detail::visit_face(rect, i, rect.upper[i], samples_per_face, [&](const Point& x) {
            for (double v : g(x)) sup = std::max(sup, std::fabs(v));
        });
    }
    // interior lattice along the diagonal, cheap extra coverage
    for (int k = 0; k <= 16; ++k) {
        Point x(rect.dim());
        for (std::size_t i = 0; i < rect.dim(); ++i)
            x[i] = rect.lower[i] + (rect.upper[i] - rect.lower[i]) * static_cast<double>(k) / 16.0;
        for (double v : g(x)) sup = std::max(sup, std::fabs(v));
    }

    FixedPointReduction red;
    red.sampled_sup = sup;
    red.lambda = sup > 0.0 ? a / (1.1 * sup) : 1.0;
    const double lambda = red.lambda;
    red.f = [g, lambda](const Point& x) {
        Point v = g(x);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = lambda * v[i] + x[i];
        return v;
    };
    return red;
}

/// Shift making every coordinate positive: x -> x + (1 - min_i a_i) * 1.
/// Returns the shift amount (0 when the rectangle is already positive).
inline double positive_translation(const Rectangle& rect) {
    double a = std::numeric_limits<double>::infinity();
    for (double v : rect.lower) a = std::min(a, v);
    return a > 0.0 ? 0.0 : 1.0 - a;
}

// ---------------------------------------------------------------------------
// zero finder

struct ZeroSearch {
    bool found = false;
    Point point;
    double g_norm = 0.0;
    int max_depth_reached = 0;
    long evaluations = 0;
    bool used_newton = false;
};

struct ZeroOptions {
    int samples_per_face = 33;
    bool newton_polish = true;
    int max_newton_iter = 50;
    long max_nodes = 20000; // stack-safety bound on processed sub-rectangles
};

namespace detail {

inline double field_norm(const Point& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

inline std::optional<Point> newton_polish(const VectorField& g, const Rectangle& bounds, Point x, double tol,
                                          int max_iter) {
    const std::size_t n = x.size();
    for (int it = 0; it < max_iter; ++it) {
        Point gx = g(x);
        double norm = field_norm(gx);
        if (norm < tol) return x;
        Eigen::MatrixXd J(n, n);
        Eigen::VectorXd rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = -gx[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double h = 1e-7 * (1.0 + std::fabs(x[j]));
            Point xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const Point gp = g(xp), gm = g(xm);
            for (std::size_t i = 0; i < n; ++i)
                J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (gp[i] - gm[i]) / (2.0 * h);
        }
        const Eigen::VectorXd d = J.partialPivLu().solve(rhs);
        if (!d.allFinite()) return std::nullopt;
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 30; ++bt) {
            Point trial = x;
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] += lambda * d(static_cast<Eigen::Index>(i));
                trial[i] = std::clamp(trial[i], bounds.lower[i], bounds.upper[i]);
            }
            if (field_norm(g(trial)) < norm) {
                x = std::move(trial);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return std::nullopt;
    }
    return field_norm(g(x)) < tol ? std::optional<Point>(x) : std::nullopt;
}

} // namespace detail

/// Recursive bisection guided by the Miranda face conditions: split the
/// longest edge, keep the sub-rectangles whose re-sampled faces still
/// classify, depth-first with a work stack when both qualify. When a split
/// plane cuts through the zero set of another component, neither half can
/// re-certify even though one holds the zero; those splits fall back to a
/// sampled exclusion test and keep every half that is not refuted by a
/// sign-definite component. Small boxes are optionally polished with damped
/// Newton (clamped to the input rectangle). Sampled checks are not rigorous,
/// so NotFound is possible even when a zero exists.
inline ZeroSearch find_zero(const VectorField& g, const Rectangle& rect, double tol, int max_depth = 80,
                            ZeroOptions opt = {}) {
    require(tol > 0.0, "find_zero: tol must be positive");
    {
        const auto classes = check_faces(g, rect, opt.samples_per_face);
        require(all_faces_pass(classes), "find_zero: Miranda face conditions fail on the input rectangle");
    }

    ZeroSearch result;
    const double polish_edge = std::sqrt(tol);
    const double exclusion_tol = 1e-12 * rect.scale();
    std::vector<std::pair<Rectangle, int>> stack;
    stack.emplace_back(rect, 0);
    long nodes = 0;

    while (!stack.empty() && nodes < opt.max_nodes) {
        auto [box, depth] = std::move(stack.back());
        stack.pop_back();
        ++nodes;
        result.max_depth_reached = std::max(result.max_depth_reached, depth);

        Point center = box.center();
        Point gc = g(center);
        ++result.evaluations;
        if (detail::field_norm(gc) < tol) {
            result.found = true;
            result.point = std::move(center);
            result.g_norm = detail::field_norm(gc);
            return result;
        }

        if (opt.newton_polish && box.max_edge() <= polish_edge) {
            auto polished = detail::newton_polish(g, rect, center, tol, opt.max_newton_iter);
            if (polished) {
                result.found = true;
                result.g_norm = detail::field_norm(g(*polished));
                result.point = std::move(*polished);
                result.used_newton = true;
                return result;
            }
        }

        if (depth >= max_depth) continue;

        const std::size_t axis = box.longest_edge();
        const double mid = 0.5 * (box.lower[axis] + box.upper[axis]);
        Rectangle left = box, right = box;
        left.upper[axis] = mid;
        right.lower[axis] = mid;
        const auto scan_left = detail::scan_faces(g, left, opt.samples_per_face);
        const auto scan_right = detail::scan_faces(g, right, opt.samples_per_face);
        const bool cert_left = all_faces_pass(scan_left.classes);
        const bool cert_right = all_faces_pass(scan_right.classes);
        // push order makes the first (left) qualifying half pop next
        if (cert_left || cert_right) {
            if (cert_right) stack.emplace_back(std::move(right), depth + 1);
            if (cert_left) stack.emplace_back(std::move(left), depth + 1);
        } else {
            if (!detail::refuted(scan_right, exclusion_tol)) stack.emplace_back(std::move(right), depth + 1);
            if (!detail::refuted(scan_left, exclusion_tol)) stack.emplace_back(std::move(left), depth + 1);
        }
    }
    return result;
}

/// Fixed point of a nonnegative field on [r_1,R_1] x ... x [r_n,R_n] under
/// the per-coordinate boundary conditions, located through the zero of
/// g(x) = x - f(x).
inline ZeroSearch kp_fixed_point_rn(const VectorField& f, const Point& r, const Point& R, double tol,
                                    int max_depth = 80, ZeroOptions opt = {}) {
    require(r.size() == R.size() && !r.empty(), "kp_fixed_point_rn: dimension mismatch");
    for (std::size_t i = 0; i < r.size(); ++i)
        require(0.0 < r[i] && r[i] < R[i], "kp_fixed_point_rn: need 0 < r_i < R_i");
    const VectorField g = [&f](const Point& x) {
        Point v = f(x);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] - v[i];
        return v;
    };
    Rectangle rect(r, R);
    const auto classes = check_faces(g, rect, opt.samples_per_face);
    require(all_faces_pass(classes),
            "kp_fixed_point_rn: neither boundary condition holds on some coordinate face");
    return find_zero(g, rect, tol, max_depth, opt);
}

} // namespace conefp::miranda

#endif // CONEFP_MIRANDA_HPP
