// conefp: certificate checks and localized solvers for two-component
// operator systems on cones (integral systems, radial p-Laplacian systems,
// finite-dimensional Miranda problems).
//
// Exit codes: 0 pass/solution found, 1 usage or config error,
//             2 certificate or face-condition failure, 3 no convergence.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conefp/certificate.hpp"
#include "conefp/config.hpp"
#include "conefp/cones.hpp"
#include "conefp/grid.hpp"
#include "conefp/hammerstein.hpp"
#include "conefp/io.hpp"
#include "conefp/miranda.hpp"
#include "conefp/plaplacian.hpp"

namespace {

using conefp::GridFunction;
using conefp::GridPair;
using Json = nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCertificateFail = 2;
constexpr int kExitNoConvergence = 3;

struct CommonOptions {
    std::string config_path;
    std::string out_dir; // overrides config when nonempty
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON problem configuration")->required();
    cmd->add_option("--out", opt.out_dir, "output directory (default: config output.dir)");
    auto* seed = cmd->add_option("--seed", "override the config RNG seed");
    seed->each([&opt](const std::string& s) { opt.seed = std::stoull(s); });
    auto* grid = cmd->add_option("--grid", "override the grid node count N");
    grid->each([&opt](const std::string& s) { opt.grid = std::stoull(s); });
}

conefp::config::ProblemConfig load_config(const CommonOptions& opt) {
    auto cfg = conefp::config::load(opt.config_path);
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.grid) cfg.solver.grid_nodes = *opt.grid;
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

void print_certificate(const conefp::cert::Certificate& c) {
    for (std::size_t j = 0; j < c.levels.size(); ++j) {
        const auto& lvl = c.levels[j];
        for (const auto& q : lvl.inequalities)
            std::printf("  [%s] %s  (lhs=%.6g rhs=%.6g margin=%.6g)\n", q.pass ? "pass" : "FAIL",
                        q.name.c_str(), q.lhs, q.rhs, q.margin);
        for (const auto& s : lvl.structural)
            std::printf("  [%s] %s%s%s\n", s.pass ? "pass" : "FAIL", s.name.c_str(),
                        s.detail.empty() ? "" : ": ", s.detail.c_str());
    }
    for (const auto& s : c.structural)
        std::printf("  [%s] %s%s%s\n", s.pass ? "pass" : "FAIL", s.name.c_str(), s.detail.empty() ? "" : ": ",
                    s.detail.c_str());
    std::printf("certificate: %s\n", c.pass ? "PASS" : "FAIL");
}

conefp::cert::Certificate run_hammerstein_check(const conefp::config::ProblemConfig& cfg,
                                                const conefp::hammerstein::HammersteinProblem& problem) {
    const auto& h = *cfg.hammerstein;
    conefp::hammerstein::CertOptions opt;
    opt.quad_n = cfg.solver.quad_n;
    opt.box_grid_n = cfg.solver.box_grid_n;
    opt.seed = cfg.seed;
    if (h.levels.size() == 1)
        return conefp::hammerstein::check_existence(problem, h.levels[0].alpha, h.levels[0].beta, opt);
    return conefp::hammerstein::check_multiplicity(problem, {h.levels[0], h.levels[1], h.levels[2]}, opt);
}

int cmd_check(const CommonOptions& common) {
    auto cfg = load_config(common);
    conefp::cert::Certificate certificate;
    if (cfg.kind == "hammerstein") {
        const auto problem = conefp::config::make_problem(*cfg.hammerstein, cfg.solver);
        certificate = run_hammerstein_check(cfg, problem);
    } else if (cfg.kind == "plaplacian") {
        const auto problem = conefp::config::make_problem(*cfg.plaplacian, cfg.solver, cfg.seed);
        certificate = conefp::plaplacian::check_conditions(problem, cfg.plaplacian->alpha, cfg.plaplacian->beta,
                                                           cfg.plaplacian->regime);
    } else {
        throw conefp::config::ConfigError("check supports hammerstein and plaplacian configs; "
                                          "use the miranda subcommand for face conditions");
    }
    conefp::io::write_json(cfg.out_dir / "certificate.json", conefp::cert::to_json(certificate));
    print_certificate(certificate);
    return certificate.pass ? kExitPass : kExitCertificateFail;
}

Json solution_json(const conefp::hammerstein::SolutionRecord& rec, const std::string& label,
                   const conefp::cones::ConeBox& box, const std::string& csv) {
    Json j;
    j["label"] = label;
    j["method"] = rec.method == conefp::hammerstein::Method::Picard ? "picard" : "deflated-newton";
    j["iterations"] = rec.iterations;
    j["residual"] = rec.residual;
    j["norms"] = rec.norms;
    j["box"] = Json{{"r", box.inner}, {"R", box.outer}};
    j["strictly_inside"] = rec.strictly_inside;
    j["csv"] = csv;
    return j;
}

int solve_hammerstein(const conefp::config::ProblemConfig& cfg, bool skip_check) {
    const auto& h = *cfg.hammerstein;
    const auto problem = conefp::config::make_problem(h, cfg.solver);
    const auto certificate = run_hammerstein_check(cfg, problem);
    conefp::io::write_json(cfg.out_dir / "certificate.json", conefp::cert::to_json(certificate));
    print_certificate(certificate);

    std::size_t certified = 0;
    for (const auto& lvl : certificate.levels)
        if (lvl.pass) ++certified;
    if (!skip_check && certified == 0) {
        std::fprintf(stderr, "no level certifies; nothing is guaranteed anywhere (rerun with --skip-check to "
                             "search anyway)\n");
        return kExitCertificateFail;
    }

    std::vector<conefp::hammerstein::SolutionRecord> found;
    Json summary;
    summary["schema"] = 1;
    summary["problem"] = "hammerstein";
    summary["seed"] = cfg.seed;
    Json solutions = Json::array();

    conefp::hammerstein::NewtonOptions newton;

    const auto accept = [&](const conefp::hammerstein::SolutionRecord& rec) {
        for (const auto& k : found)
            if (conefp::sup_dist(rec.u, k.u) < newton.min_separation) return false;
        return true;
    };

    for (std::size_t j = 0; j < h.levels.size(); ++j) {
        const auto& lvl = certificate.levels[j];
        const conefp::cones::ConeBox box({lvl.r[0], lvl.r[1]}, {lvl.R[0], lvl.R[1]});
        const std::string label = "level " + std::to_string(j + 1);

        GridPair init(GridFunction(problem.grid_size(), std::sqrt(box.inner[0] * box.outer[0])),
                      GridFunction(problem.grid_size(), std::sqrt(box.inner[1] * box.outer[1])));
        auto picard = conefp::hammerstein::solve_picard(problem, box, init, cfg.solver.tol, cfg.solver.max_iter);
        std::optional<conefp::hammerstein::SolutionRecord> rec;
        if (picard.status == conefp::hammerstein::SolveStatus::Converged) {
            rec = std::move(*picard.record);
        } else {
            std::printf("%s: picard %s after %d iterations, falling back to deflated newton\n", label.c_str(),
                        picard.status == conefp::hammerstein::SolveStatus::BoxEscape ? "escaped the box"
                                                                                     : "did not converge",
                        picard.iterations);
            auto newton_result =
                conefp::hammerstein::solve_deflated_newton(problem, box, found, cfg.solver.tol, newton);
            if (newton_result.status == conefp::hammerstein::SolveStatus::Converged)
                rec = std::move(*newton_result.record);
        }
        if (rec && accept(*rec)) {
            const std::string csv = "solution_" + std::to_string(found.size() + 1) + ".csv";
            conefp::io::write_grid_pair_csv(cfg.out_dir / csv, rec->u);
            solutions.push_back(solution_json(*rec, label + (lvl.pass ? "" : " (uncertified)"), box, csv));
            std::printf("%s: found solution, norms (%.6g, %.6g), residual %.3g\n", label.c_str(), rec->norms[0],
                        rec->norms[1], rec->residual);
            found.push_back(std::move(*rec));
        } else if (rec) {
            std::printf("%s: converged onto an already-recorded solution; skipped\n", label.c_str());
        } else {
            std::printf("%s: no solution located\n", label.c_str());
        }
    }

    if (h.levels.size() == 3) {
        const auto& lvl3 = certificate.levels[2];
        const conefp::cones::ConeBox box3({lvl3.r[0], lvl3.r[1]}, {lvl3.R[0], lvl3.R[1]});
        auto extra = conefp::hammerstein::solve_deflated_newton(problem, box3, found, cfg.solver.tol, newton);
        if (extra.status == conefp::hammerstein::SolveStatus::Converged && accept(*extra.record)) {
            auto rec = std::move(*extra.record);
            const std::string csv = "solution_" + std::to_string(found.size() + 1) + ".csv";
            conefp::io::write_grid_pair_csv(cfg.out_dir / csv, rec.u);
            solutions.push_back(solution_json(rec, "set difference", box3, csv));
            std::printf("set difference: found solution, norms (%.6g, %.6g), residual %.3g\n", rec.norms[0],
                        rec.norms[1], rec.residual);
            found.push_back(std::move(rec));
        } else {
            std::printf("set difference: best-effort search found nothing new\n");
        }
    }

    summary["count"] = found.size();
    summary["solutions"] = solutions;
    summary["certificate"] = "certificate.json";
    conefp::io::write_json(cfg.out_dir / "summary.json", summary);
    if (found.empty()) return kExitNoConvergence;
    return kExitPass;
}

int solve_plaplacian(const conefp::config::ProblemConfig& cfg, bool skip_check) {
    const auto& pl = *cfg.plaplacian;
    const auto problem = conefp::config::make_problem(pl, cfg.solver, cfg.seed);
    const auto certificate = conefp::plaplacian::check_conditions(problem, pl.alpha, pl.beta, pl.regime);
    conefp::io::write_json(cfg.out_dir / "certificate.json", conefp::cert::to_json(certificate));
    print_certificate(certificate);
    if (!skip_check && !certificate.pass) return kExitCertificateFail;

    // Section bounds per component regime: compressive components bound phi
    // below by beta and the norm above by alpha; expansive components swap.
    std::array<double, 2> inner{}, outer{};
    for (int i = 0; i < 2; ++i) {
        const bool expansive = pl.regime.tag[static_cast<std::size_t>(i)] == conefp::cones::ComponentRegime::Expansive;
        inner[i] = expansive ? pl.alpha[i] : pl.beta[i];
        outer[i] = expansive ? pl.beta[i] : pl.alpha[i];
    }
    const conefp::cones::PhiSection section(inner, outer, pl.window[0], pl.window[1]);

    std::array<double, 2> init_vals{std::sqrt(pl.alpha[0] * pl.beta[0]), std::sqrt(pl.alpha[1] * pl.beta[1])};
    if (pl.init_values) init_vals = *pl.init_values;
    GridPair init(GridFunction(problem.grid_size(), init_vals[0]), GridFunction(problem.grid_size(), init_vals[1]));

    auto result =
        conefp::plaplacian::solve_radial(problem, section, init, cfg.solver.tol, cfg.solver.max_iter, pl.regime);

    Json summary;
    summary["schema"] = 1;
    summary["problem"] = "plaplacian";
    summary["seed"] = cfg.seed;
    if (result.status != conefp::plaplacian::RadialStatus::Converged) {
        summary["count"] = 0;
        summary["status"] = result.status == conefp::plaplacian::RadialStatus::SectionEscape ? "section-escape"
                                                                                             : "no-convergence";
        conefp::io::write_json(cfg.out_dir / "summary.json", summary);
        std::printf("radial solve: %s\n", summary["status"].get<std::string>().c_str());
        return kExitNoConvergence;
    }

    const auto& rec = *result.record;
    conefp::io::write_grid_pair_csv(cfg.out_dir / "solution_1.csv", rec.u, "r");
    Json sidecar;
    sidecar["schema"] = 1;
    sidecar["phi"] = rec.phi;
    sidecar["norms"] = rec.norms;
    sidecar["residual"] = rec.residual;
    sidecar["iterations"] = rec.iterations;
    sidecar["strictly_inside"] = rec.strictly_inside;
    sidecar["certificate"] = "certificate.json";
    conefp::io::write_json(cfg.out_dir / "solution_1.json", sidecar);
    summary["count"] = 1;
    summary["solutions"] = Json::array({Json{{"label", "radial"},
                                             {"iterations", rec.iterations},
                                             {"residual", rec.residual},
                                             {"norms", rec.norms},
                                             {"phi", rec.phi},
                                             {"strictly_inside", rec.strictly_inside},
                                             {"csv", "solution_1.csv"}}});
    conefp::io::write_json(cfg.out_dir / "summary.json", summary);
    std::printf("radial solve: converged in %d iterations, norms (%.6g, %.6g), phi (%.6g, %.6g), residual %.3g\n",
                rec.iterations, rec.norms[0], rec.norms[1], rec.phi[0], rec.phi[1], rec.residual);
    return kExitPass;
}

int cmd_solve(const CommonOptions& common, bool skip_check) {
    auto cfg = load_config(common);
    if (cfg.kind == "hammerstein") return solve_hammerstein(cfg, skip_check);
    if (cfg.kind == "plaplacian") return solve_plaplacian(cfg, skip_check);
    throw conefp::config::ConfigError("solve supports hammerstein and plaplacian configs");
}

int cmd_miranda(const CommonOptions& common) {
    auto cfg = load_config(common);
    if (cfg.kind != "miranda")
        throw conefp::config::ConfigError("the miranda subcommand needs a miranda config");
    const auto& m = *cfg.miranda;

    const std::array<conefp::expr::Ast, 2> field = m.field;
    const conefp::miranda::VectorField g = [&field](const conefp::miranda::Point& x) {
        return conefp::miranda::Point{conefp::expr::eval_signed(field[0], x[0], x[1]),
                                      conefp::expr::eval_signed(field[1], x[0], x[1])};
    };
    const conefp::miranda::Rectangle rect({m.lower[0], m.lower[1]}, {m.upper[0], m.upper[1]});

    const auto classes = conefp::miranda::check_faces(g, rect, m.samples_per_face);
    Json report;
    report["schema"] = 1;
    report["problem"] = "miranda";
    Json faces = Json::array();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        faces.push_back(Json{{"coordinate", i + 1}, {"condition", conefp::miranda::face_condition_name(classes[i])}});
        std::printf("coordinate %zu: condition %s\n", i + 1, conefp::miranda::face_condition_name(classes[i]));
    }
    report["faces"] = faces;
    if (!conefp::miranda::all_faces_pass(classes)) {
        report["found"] = false;
        conefp::io::write_json(cfg.out_dir / "miranda.json", report);
        std::fprintf(stderr, "face conditions fail; the rectangle carries no Miranda certificate\n");
        return kExitCertificateFail;
    }

    conefp::miranda::ZeroOptions opt;
    opt.samples_per_face = m.samples_per_face;
    opt.newton_polish = m.newton_polish;
    const auto zero = conefp::miranda::find_zero(g, rect, m.tol, m.max_depth, opt);
    report["found"] = zero.found;
    if (zero.found) {
        report["zero"] = zero.point;
        report["g_norm"] = zero.g_norm;
        report["used_newton"] = zero.used_newton;
        std::printf("zero at (%.12g, %.12g), field norm %.3g\n", zero.point[0], zero.point[1], zero.g_norm);
    } else {
        std::printf("no zero located within depth %d\n", m.max_depth);
    }
    report["evaluations"] = zero.evaluations;
    report["max_depth_reached"] = zero.max_depth_reached;
    conefp::io::write_json(cfg.out_dir / "miranda.json", report);
    return zero.found ? kExitPass : kExitNoConvergence;
}

int cmd_harnack(const CommonOptions& common, const std::string& csv_path, double tol) {
    auto cfg = load_config(common);
    if (cfg.kind != "plaplacian")
        throw conefp::config::ConfigError("harnack needs a plaplacian config for p and the dimension");
    const auto& pl = *cfg.plaplacian;
    const GridPair u = conefp::io::read_grid_pair_csv(csv_path);

    Json report;
    report["schema"] = 1;
    report["problem"] = "harnack";
    report["csv"] = csv_path;
    report["tol"] = tol;
    bool all_pass = true;
    Json comps = Json::array();
    for (int i = 0; i < 2; ++i) {
        const auto rep = conefp::plaplacian::harnack_check(u.component(i), pl.p[static_cast<std::size_t>(i)],
                                                           pl.dim, tol);
        all_pass = all_pass && rep.pass;
        comps.push_back(Json{{"component", i + 1},
                             {"pass", rep.pass},
                             {"monotone_pass", rep.monotone_pass},
                             {"bound_pass", rep.bound_pass},
                             {"worst_margin", rep.worst_margin},
                             {"worst_node", rep.worst_node},
                             {"worst_increase", rep.worst_increase}});
        std::printf("component %d: %s (worst margin %.3g at node %zu)\n", i + 1, rep.pass ? "pass" : "FAIL",
                    rep.worst_margin, rep.worst_node);
    }
    report["components"] = comps;
    report["pass"] = all_pass;
    conefp::io::write_json(cfg.out_dir / "harnack.json", report);
    return all_pass ? kExitPass : kExitCertificateFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certificate checks and localized solvers for two-component cone fixed-point systems"};
    app.require_subcommand(1);

    CommonOptions check_opt, solve_opt, miranda_opt, harnack_opt;
    bool skip_check = false;
    std::string harnack_csv;
    double harnack_tol = 1e-6;

    auto* check = app.add_subcommand("check", "evaluate the certificate inequalities for a config");
    add_common(check, check_opt);
    auto* solve = app.add_subcommand("solve", "certify, then compute localized solutions");
    add_common(solve, solve_opt);
    solve->add_flag("--skip-check", skip_check, "solve even when no level certifies");
    auto* miranda = app.add_subcommand("miranda", "classify rectangle faces and locate a zero");
    add_common(miranda, miranda_opt);
    auto* harnack = app.add_subcommand("harnack", "check the Harnack lower bound on a CSV solution");
    add_common(harnack, harnack_opt);
    harnack->add_option("--in", harnack_csv, "solution CSV (columns r,u1,u2)")->required();
    harnack->add_option("--tol", harnack_tol, "tolerance relative to ||v||");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (check->parsed()) return cmd_check(check_opt);
        if (solve->parsed()) return cmd_solve(solve_opt, skip_check);
        if (miranda->parsed()) return cmd_miranda(miranda_opt);
        if (harnack->parsed()) return cmd_harnack(harnack_opt, harnack_csv, harnack_tol);
    } catch (const conefp::config::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
