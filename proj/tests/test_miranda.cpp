#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conefp/common.hpp"
#include "conefp/miranda.hpp"

using namespace conefp;
using namespace conefp::miranda;

namespace {

VectorField linear_field(const std::vector<std::vector<double>>& M, const Point& x_star) {
    return [M, x_star](const Point& x) {
        Point out(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j) out[i] += M[i][j] * (x[j] - x_star[j]);
        return out;
    };
}

} // namespace

TEST_CASE("identity field classifies as condition B") {
    const VectorField g = [](const Point& x) { return x; };
    const Rectangle rect({-1.0, -1.0}, {1.0, 1.0});
    const auto classes = check_faces(g, rect);
    REQUIRE(classes[0] == FaceCondition::ConditionB);
    REQUIRE(classes[1] == FaceCondition::ConditionB);
}

TEST_CASE("golden-ratio system classifies B then A") {
    const VectorField g = [](const Point& x) {
        return Point{x[0] * x[0] + x[1] - 1.0, x[0] - x[1]};
    };
    const Rectangle rect({0.0, 0.0}, {1.0, 1.0});
    const auto classes = check_faces(g, rect);
    REQUIRE(classes[0] == FaceCondition::ConditionB);
    REQUIRE(classes[1] == FaceCondition::ConditionA);
}

TEST_CASE("a field that never changes sign fails everywhere") {
    const VectorField g = [](const Point& x) { return Point(x.size(), 1.0); };
    const Rectangle rect({0.0, 0.0}, {1.0, 1.0});
    const auto classes = check_faces(g, rect);
    REQUIRE(classes[0] == FaceCondition::Fail);
    REQUIRE(classes[1] == FaceCondition::Fail);
    REQUIRE_FALSE(all_faces_pass(classes));
}

TEST_CASE("negating the field swaps A and B") {
    Rng rng(51);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::vector<double>> M{{0.0, 0.0}, {0.0, 0.0}};
        Point x_star{0.3 + 0.4 * rng.uniform(), 0.3 + 0.4 * rng.uniform()};
        for (int i = 0; i < 2; ++i) {
            const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
            M[i][i] = sign * (1.0 + rng.uniform());
            M[i][1 - i] = 0.3 * (rng.uniform() - 0.5);
        }
        const VectorField g = linear_field(M, x_star);
        const VectorField neg = [&g](const Point& x) {
            Point v = g(x);
            for (double& y : v) y = -y;
            return v;
        };
        const Rectangle rect({0.0, 0.0}, {1.0, 1.0});
        const auto a = check_faces(g, rect);
        const auto b = check_faces(neg, rect);
        for (int i = 0; i < 2; ++i) {
            if (a[i] == FaceCondition::ConditionA) REQUIRE(b[i] == FaceCondition::ConditionB);
            if (a[i] == FaceCondition::ConditionB) REQUIRE(b[i] == FaceCondition::ConditionA);
            if (a[i] == FaceCondition::Fail) REQUIRE(b[i] == FaceCondition::Fail);
        }
    }
}

TEST_CASE("fixed-point reduction keeps the rectangle in the positive orthant") {
    const VectorField g = [](const Point&) { return Point{-1.0, -1.0}; };
    const Rectangle rect({1.0, 1.0}, {2.0, 2.0});
    const auto red = pm_to_fixed_point(g, rect);
    REQUIRE(red.lambda == Catch::Approx(1.0 / 1.1));
    Rng rng(61);
    for (int k = 0; k < 10000; ++k) {
        Point x{1.0 + rng.uniform(), 1.0 + rng.uniform()};
        for (double v : red.f(x)) REQUIRE(v >= 0.0);
    }
}

TEST_CASE("zeros of g are fixed points of the reduction") {
    const VectorField g = [](const Point& x) { return Point{x[0] - 1.5, x[1] - 1.5}; };
    const Rectangle rect({1.0, 1.0}, {2.0, 2.0});
    const auto red = pm_to_fixed_point(g, rect);
    const Point fixed = red.f({1.5, 1.5});
    REQUIRE(fixed[0] == Catch::Approx(1.5));
    REQUIRE(fixed[1] == Catch::Approx(1.5));
}

TEST_CASE("reduction handles the identically-zero field") {
    const VectorField g = [](const Point& x) { return Point(x.size(), 0.0); };
    const Rectangle rect({1.0, 1.0}, {2.0, 2.0});
    const auto red = pm_to_fixed_point(g, rect);
    REQUIRE(red.lambda == 1.0);
}

TEST_CASE("reduction demands a positive rectangle and suggests the shift") {
    const VectorField g = [](const Point& x) { return x; };
    const Rectangle rect({-1.0, 0.5}, {1.0, 2.0});
    REQUIRE_THROWS_AS(pm_to_fixed_point(g, rect), std::invalid_argument);
    REQUIRE(positive_translation(rect) == Catch::Approx(2.0)); // 1 - (-1)
    REQUIRE(positive_translation(Rectangle({1.0, 1.0}, {2.0, 2.0})) == 0.0);
}

TEST_CASE("find_zero solves a separable linear system") {
    const VectorField g = [](const Point& x) { return Point{x[0] - 0.5, x[1] - 0.7}; };
    const Rectangle rect({0.0, 0.0}, {1.0, 1.0});
    const auto res = find_zero(g, rect, 1e-12);
    REQUIRE(res.found);
    REQUIRE(res.point[0] == Catch::Approx(0.5).margin(1e-10));
    REQUIRE(res.point[1] == Catch::Approx(0.7).margin(1e-10));
    REQUIRE(rect.contains(res.point));
}

TEST_CASE("find_zero reaches the golden ratio by bisection alone") {
    const VectorField g = [](const Point& x) {
        return Point{x[0] * x[0] + x[1] - 1.0, x[0] - x[1]};
    };
    const Rectangle rect({0.0, 0.0}, {1.0, 1.0});
    ZeroOptions opt;
    opt.newton_polish = false;
    const auto res = find_zero(g, rect, 1e-9, 80, opt);
    REQUIRE(res.found);
    REQUIRE_FALSE(res.used_newton);

    // oracle: 1-D bisection on t^2 + t - 1 over [0,1]
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (lo + hi);
        ((mid * mid + mid - 1.0 < 0.0) ? lo : hi) = mid;
    }
    const double golden = 0.5 * (lo + hi);
    REQUIRE(golden == Catch::Approx((std::sqrt(5.0) - 1.0) / 2.0).margin(1e-12));
    REQUIRE(res.point[0] == Catch::Approx(golden).margin(1e-8));
    REQUIRE(res.point[1] == Catch::Approx(golden).margin(1e-8));
}

TEST_CASE("find_zero refuses rectangles whose faces fail") {
    const VectorField g = [](const Point& x) { return Point(x.size(), 1.0); };
    const Rectangle rect({0.0, 0.0}, {1.0, 1.0});
    REQUIRE_THROWS_AS(find_zero(g, rect, 1e-9), std::invalid_argument);
}

TEST_CASE("planted zeros of diagonally dominant fields are recovered") {
    Rng rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> M{{0.0, 0.0}, {0.0, 0.0}};
        // zeros sit near oracle-cell centers so the sign scan marks exactly
        // one cell; a zero hugging a gridline would spill into the neighbor
        Point x_star;
        for (int i = 0; i < 2; ++i) {
            const double k = std::floor(200.0 + 600.0 * rng.uniform());
            x_star.push_back((k + 0.5 + 0.2 * (rng.uniform() - 0.5)) / 1000.0);
        }
        for (int i = 0; i < 2; ++i) {
            const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
            M[i][i] = sign * (1.5 + rng.uniform());
            M[i][1 - i] = 0.5 * (rng.uniform() - 0.5);
        }
        const VectorField g = linear_field(M, x_star);
        const Rectangle rect({0.0, 0.0}, {1.0, 1.0});

        const auto res = find_zero(g, rect, 1e-12);
        REQUIRE(res.found);
        REQUIRE(std::fabs(res.point[0] - x_star[0]) < 1e-10);
        REQUIRE(std::fabs(res.point[1] - x_star[1]) < 1e-10);
        REQUIRE(rect.contains(res.point));

        // oracle: dense sign scan at 1e-3 resolution locates exactly one
        // cell whose corners straddle zero in every component
        long hits = 0;
        const int n = 1000;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x0 = i / double(n), x1 = (i + 1) / double(n);
                const double y0 = j / double(n), y1 = (j + 1) / double(n);
                bool cell_ok = true;
                for (int comp = 0; comp < 2 && cell_ok; ++comp) {
                    double mn = std::numeric_limits<double>::infinity();
                    double mx = -mn;
                    for (const auto& corner : {Point{x0, y0}, Point{x0, y1}, Point{x1, y0}, Point{x1, y1}}) {
                        const double v = g(corner)[comp];
                        mn = std::min(mn, v);
                        mx = std::max(mx, v);
                    }
                    cell_ok = mn <= 0.0 && mx >= 0.0;
                }
                if (cell_ok) ++hits;
            }
        REQUIRE(hits == 1);
    }
}

TEST_CASE("kp fixed point of a constant field is the constant") {
    const Point r{0.5, 0.5}, R{2.0, 2.0};
    const VectorField f = [](const Point& x) { return Point(x.size(), 1.25); };
    const auto res = kp_fixed_point_rn(f, r, R, 1e-12);
    REQUIRE(res.found);
    REQUIRE(res.point[0] == Catch::Approx(1.25).margin(1e-10));
    REQUIRE(res.point[1] == Catch::Approx(1.25).margin(1e-10));
}

TEST_CASE("kp fixed point of a sublinear map lands in the box") {
    // f_i(x) = 2 sqrt(x_i): per-coordinate fixed point at 4, oracle by
    // 1-D bisection on x - 2 sqrt(x)
    const Point r{1.0, 1.0}, R{9.0, 9.0};
    const VectorField f = [](const Point& x) { return Point{2.0 * std::sqrt(x[0]), 2.0 * std::sqrt(x[1])}; };
    const auto res = kp_fixed_point_rn(f, r, R, 1e-12);
    REQUIRE(res.found);
    double lo = 1.0, hi = 9.0;
    for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        ((mid - 2.0 * std::sqrt(mid) < 0.0) ? lo : hi) = mid;
    }
    for (int i = 0; i < 2; ++i) {
        REQUIRE(res.point[i] >= r[i]);
        REQUIRE(res.point[i] <= R[i]);
        REQUIRE(res.point[i] == Catch::Approx(0.5 * (lo + hi)).margin(1e-8));
    }
}

TEST_CASE("kp fixed point rejects fields violating both boundary patterns") {
    // f1 = x1 + 1 exceeds x1 on both faces of coordinate 1, so it breaks
    // the upper condition of pattern (a) and the lower condition of (b)
    const VectorField f = [](const Point& x) {
        return Point{x[0] + 1.0, 1.25};
    };
    REQUIRE_THROWS_AS(kp_fixed_point_rn(f, {0.5, 0.5}, {2.0, 2.0}, 1e-9), std::invalid_argument);
}

TEST_CASE("three-dimensional fields work through the same machinery") {
    std::vector<std::vector<double>> M{{2.0, 0.1, -0.1}, {0.0, -1.5, 0.2}, {0.1, 0.1, 1.8}};
    const Point x_star{0.4, 0.5, 0.6};
    const VectorField g = linear_field(M, x_star);
    const Rectangle rect({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    const auto classes = check_faces(g, rect, 17);
    REQUIRE(all_faces_pass(classes));
    const auto res = find_zero(g, rect, 1e-11);
    REQUIRE(res.found);
    for (int i = 0; i < 3; ++i) REQUIRE(res.point[i] == Catch::Approx(x_star[i]).margin(1e-9));
}
