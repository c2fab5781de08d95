#ifndef CONEFP_CONFIG_HPP
#define CONEFP_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conefp/cones.hpp"
#include "conefp/expr.hpp"
#include "conefp/hammerstein.hpp"
#include "conefp/miranda.hpp"
#include "conefp/plaplacian.hpp"

namespace conefp::config {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
}

inline const Json& get(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("missing key \"" + std::string(key) + "\" in " + where);
    return *it;
}

inline double get_number(const Json& obj, const char* key, const std::string& where) {
    const Json& v = get(obj, key, where);
    if (!v.is_number()) throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be a number");
    return v.get<double>();
}

inline double get_number_or(const Json& obj, const char* key, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ConfigError("key \"" + std::string(key) + "\" must be a number");
    return it->get<double>();
}

inline std::array<double, 2> get_pair(const Json& obj, const char* key, const std::string& where) {
    const Json& v = get(obj, key, where);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be an array of two numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline expr::Ast parse_expr_or_fail(const std::string& text, std::array<std::string, 2> vars,
                                    const std::string& where) {
    try {
        return expr::parse(text, std::move(vars));
    } catch (const expr::ParseError& e) {
        throw ConfigError("cannot parse expression in " + where + ": " + e.what());
    }
}

} // namespace detail

struct SolverSettings {
    std::size_t grid_nodes = 257;
    double tol = 1e-10;
    int max_iter = 300;
    int box_grid_n = boxopt::kDefaultGridN;
    int quad_n = 1025;
};

struct HammersteinConfig {
    std::array<hammerstein::KernelSpec, 2> kernels;
    std::array<hammerstein::NonlinearitySpec, 2> nonlinearities;
    std::vector<hammerstein::ParameterLevel> levels; // one or three
};

struct PlaplacianConfig {
    std::array<double, 2> p{3.0, 3.0};
    int dim = 2;
    std::array<double, 2> window{0.25, 0.75};
    std::array<hammerstein::NonlinearitySpec, 2> nonlinearities;
    cones::Regime regime = cones::Regime::cc();
    std::array<double, 2> alpha{}, beta{};
    std::optional<std::array<double, 2>> init_values;
};

struct MirandaConfig {
    std::array<expr::Ast, 2> field;
    std::array<double, 2> lower{}, upper{};
    int samples_per_face = 33;
    double tol = 1e-9;
    int max_depth = 80;
    bool newton_polish = true;
};

struct ProblemConfig {
    std::string kind; // hammerstein | plaplacian | miranda
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = ".";
    SolverSettings solver;
    std::optional<HammersteinConfig> hammerstein;
    std::optional<PlaplacianConfig> plaplacian;
    std::optional<MirandaConfig> miranda;
};

namespace detail {

inline boxopt::MonotoneTags parse_tags(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2)
        throw ConfigError("\"monotone\" in " + where + " must list two tags");
    boxopt::MonotoneTags tags;
    for (int i = 0; i < 2; ++i) {
        const std::string s = v[static_cast<std::size_t>(i)].get<std::string>();
        if (s == "nondecreasing") tags.tag[static_cast<std::size_t>(i)] = boxopt::Monotone::Nondecreasing;
        else if (s == "unknown") tags.tag[static_cast<std::size_t>(i)] = boxopt::Monotone::Unknown;
        else throw ConfigError("monotone tag must be \"nondecreasing\" or \"unknown\" in " + where);
    }
    return tags;
}

inline hammerstein::NonlinearitySpec parse_nonlinearity(const Json& obj, const std::string& where) {
    check_keys(obj, {"expr", "monotone"}, where);
    const std::string text = get(obj, "expr", where).get<std::string>();
    boxopt::MonotoneTags tags;
    if (obj.contains("monotone")) tags = parse_tags(obj["monotone"], where);
    expr::Ast ast = parse_expr_or_fail(text, {"u1", "u2"}, where);
    hammerstein::NonlinearitySpec spec;
    spec.f = [ast](double x, double y) { return expr::eval(ast, x, y); };
    spec.tags = tags;
    spec.source = std::move(ast);
    return spec;
}

// scalar factor (weight g or bound Phi): "one", an expression in s, or a
// tabulated array of samples on the uniform s-grid
inline void parse_scalar(const Json& v, const std::string& where, hammerstein::ScalarKind& kind,
                         expr::Ast& ast, std::vector<double>& table) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "one" || s == "1") {
            kind = hammerstein::ScalarKind::One;
            return;
        }
        kind = hammerstein::ScalarKind::Expression;
        ast = parse_expr_or_fail(s, {"s", "t"}, where);
        return;
    }
    if (v.is_array()) {
        kind = hammerstein::ScalarKind::Tabulated;
        table = v.get<std::vector<double>>();
        if (table.size() < 2) throw ConfigError("tabulated values in " + where + " need at least 2 samples");
        return;
    }
    throw ConfigError(where + " must be \"one\", an expression string, or an array of samples");
}

inline hammerstein::KernelSpec parse_kernel(const Json& obj, std::array<double, 2> window,
                                            const std::string& where) {
    check_keys(obj, {"kind", "expr", "values", "c", "phi", "weight"}, where);
    hammerstein::KernelSpec spec;
    spec.a = window[0];
    spec.b = window[1];
    const std::string kind = get(obj, "kind", where).get<std::string>();
    if (kind == "green_dirichlet") {
        spec = hammerstein::KernelSpec::green_dirichlet(window[0], window[1]);
    } else if (kind == "expression") {
        spec.kind = hammerstein::KernelKind::Expression;
        spec.kernel_expr = parse_expr_or_fail(get(obj, "expr", where).get<std::string>(), {"t", "s"}, where);
    } else if (kind == "tabulated") {
        spec.kind = hammerstein::KernelKind::Tabulated;
        spec.table = get(obj, "values", where).get<std::vector<std::vector<double>>>();
    } else {
        throw ConfigError("kernel kind in " + where + " must be green_dirichlet, expression, or tabulated");
    }
    if (obj.contains("c")) spec.c = get_number(obj, "c", where);
    else if (kind != "green_dirichlet") throw ConfigError("kernel " + where + " needs an explicit cone constant c");
    if (obj.contains("phi")) parse_scalar(obj["phi"], where + ".phi", spec.phi_kind, spec.phi_expr, spec.phi_table);
    else if (kind != "green_dirichlet") throw ConfigError("kernel " + where + " needs a bound phi");
    if (obj.contains("weight"))
        parse_scalar(obj["weight"], where + ".weight", spec.weight_kind, spec.weight_expr, spec.weight_table);
    spec.validate();
    return spec;
}

inline SolverSettings parse_solver(const Json& obj, std::size_t default_nodes) {
    SolverSettings s;
    s.grid_nodes = default_nodes;
    if (obj.is_null()) return s;
    check_keys(obj, {"N", "tol", "max_iter", "grid_n", "quad_n"}, "solver");
    s.grid_nodes = static_cast<std::size_t>(get_number_or(obj, "N", static_cast<double>(default_nodes)));
    s.tol = get_number_or(obj, "tol", s.tol);
    s.max_iter = static_cast<int>(get_number_or(obj, "max_iter", s.max_iter));
    s.box_grid_n = static_cast<int>(get_number_or(obj, "grid_n", s.box_grid_n));
    s.quad_n = static_cast<int>(get_number_or(obj, "quad_n", s.quad_n));
    if (s.tol <= 0.0) throw ConfigError("solver.tol must be positive");
    return s;
}

} // namespace detail

inline ProblemConfig parse(const Json& root) {
    using detail::check_keys;
    using detail::get;
    using detail::get_pair;

    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    if (!root.contains("schema") || !root["schema"].is_number_integer() || root["schema"].get<int>() != 1)
        throw ConfigError("config requires \"schema\": 1");

    ProblemConfig cfg;
    cfg.kind = get(root, "problem", "config").get<std::string>();
    if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("output")) {
        check_keys(root["output"], {"dir"}, "output");
        cfg.out_dir = get(root["output"], "dir", "output").get<std::string>();
    }

    if (cfg.kind == "hammerstein") {
        check_keys(root, {"schema", "problem", "seed", "output", "window", "kernels", "nonlinearities", "levels",
                          "solver"},
                   "config");
        cfg.solver = detail::parse_solver(root.contains("solver") ? root["solver"] : Json(), 257);
        HammersteinConfig h;
        const auto window = get_pair(root, "window", "config");
        const Json& kernels = get(root, "kernels", "config");
        if (!kernels.is_array() || kernels.size() != 2)
            throw ConfigError("\"kernels\" must be an array of two kernel blocks");
        for (int i = 0; i < 2; ++i)
            h.kernels[static_cast<std::size_t>(i)] =
                detail::parse_kernel(kernels[static_cast<std::size_t>(i)], window,
                                     "kernels[" + std::to_string(i) + "]");
        const Json& fs = get(root, "nonlinearities", "config");
        if (!fs.is_array() || fs.size() != 2)
            throw ConfigError("\"nonlinearities\" must be an array of two blocks");
        for (int i = 0; i < 2; ++i)
            h.nonlinearities[static_cast<std::size_t>(i)] =
                detail::parse_nonlinearity(fs[static_cast<std::size_t>(i)],
                                           "nonlinearities[" + std::to_string(i) + "]");
        const Json& levels = get(root, "levels", "config");
        if (!levels.is_array() || (levels.size() != 1 && levels.size() != 3))
            throw ConfigError("\"levels\" must hold one level (existence) or three (multiplicity)");
        for (const Json& lvl : levels) {
            check_keys(lvl, {"alpha", "beta"}, "levels[]");
            hammerstein::ParameterLevel p;
            p.alpha = get_pair(lvl, "alpha", "levels[]");
            p.beta = get_pair(lvl, "beta", "levels[]");
            for (int i = 0; i < 2; ++i) {
                if (!(p.alpha[i] > 0.0) || !(p.beta[i] > 0.0))
                    throw ConfigError("level parameters must be positive");
                if (p.alpha[i] == p.beta[i])
                    throw ConfigError("alpha_" + std::to_string(i + 1) + " must differ from beta_" +
                                      std::to_string(i + 1));
            }
            h.levels.push_back(p);
        }
        cfg.hammerstein = std::move(h);
        return cfg;
    }

    if (cfg.kind == "plaplacian") {
        check_keys(root, {"schema", "problem", "seed", "output", "p", "dim", "window", "nonlinearities", "regime",
                          "alpha", "beta", "init", "solver"},
                   "config");
        cfg.solver = detail::parse_solver(root.contains("solver") ? root["solver"] : Json(), 513);
        PlaplacianConfig pl;
        pl.p = get_pair(root, "p", "config");
        pl.dim = static_cast<int>(detail::get_number(root, "dim", "config"));
        pl.window = get_pair(root, "window", "config");
        const Json& fs = get(root, "nonlinearities", "config");
        if (!fs.is_array() || fs.size() != 2)
            throw ConfigError("\"nonlinearities\" must be an array of two blocks");
        for (int i = 0; i < 2; ++i) {
            pl.nonlinearities[static_cast<std::size_t>(i)] =
                detail::parse_nonlinearity(fs[static_cast<std::size_t>(i)],
                                           "nonlinearities[" + std::to_string(i) + "]");
            if (!pl.nonlinearities[static_cast<std::size_t>(i)].tags.all_nondecreasing())
                throw ConfigError("radial nonlinearities must be tagged nondecreasing in both variables");
        }
        const std::string regime = get(root, "regime", "config").get<std::string>();
        if (regime == "cc") pl.regime = cones::Regime::cc();
        else if (regime == "ce") pl.regime = cones::Regime::ce();
        else if (regime == "ec") pl.regime = cones::Regime::ec();
        else if (regime == "ee") pl.regime = cones::Regime::ee();
        else throw ConfigError("regime must be one of cc, ce, ec, ee");
        pl.alpha = get_pair(root, "alpha", "config");
        pl.beta = get_pair(root, "beta", "config");
        if (root.contains("init")) pl.init_values = get_pair(root, "init", "config");
        cfg.plaplacian = std::move(pl);
        return cfg;
    }

    if (cfg.kind == "miranda") {
        check_keys(root, {"schema", "problem", "seed", "output", "field", "rect", "samples_per_face", "tol",
                          "max_depth", "newton_polish"},
                   "config");
        MirandaConfig m;
        const Json& field = get(root, "field", "config");
        if (!field.is_array() || field.size() != 2)
            throw ConfigError("\"field\" must hold two component expressions in u1, u2");
        for (int i = 0; i < 2; ++i)
            m.field[static_cast<std::size_t>(i)] =
                detail::parse_expr_or_fail(field[static_cast<std::size_t>(i)].get<std::string>(), {"u1", "u2"},
                                           "field[" + std::to_string(i) + "]");
        const Json& rect = get(root, "rect", "config");
        check_keys(rect, {"lower", "upper"}, "rect");
        m.lower = get_pair(rect, "lower", "rect");
        m.upper = get_pair(rect, "upper", "rect");
        for (int i = 0; i < 2; ++i)
            if (!(m.lower[i] < m.upper[i])) throw ConfigError("rect needs lower_i < upper_i");
        m.samples_per_face = static_cast<int>(detail::get_number_or(root, "samples_per_face", 33));
        m.tol = detail::get_number_or(root, "tol", 1e-9);
        m.max_depth = static_cast<int>(detail::get_number_or(root, "max_depth", 80));
        if (root.contains("newton_polish")) m.newton_polish = root["newton_polish"].get<bool>();
        if (m.tol <= 0.0) throw ConfigError("tol must be positive");
        cfg.miranda = std::move(m);
        return cfg;
    }

    throw ConfigError("problem must be one of hammerstein, plaplacian, miranda");
}

inline ProblemConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    Json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse(root);
}

inline hammerstein::HammersteinProblem make_problem(const HammersteinConfig& h, const SolverSettings& solver) {
    return hammerstein::HammersteinProblem(h.kernels[0], h.kernels[1], h.nonlinearities[0], h.nonlinearities[1],
                                           solver.grid_nodes);
}

inline plaplacian::RadialProblem make_problem(const PlaplacianConfig& pl, const SolverSettings& solver,
                                              std::uint64_t seed) {
    plaplacian::PParams params(pl.p[0], pl.p[1], pl.dim, pl.window[0], pl.window[1]);
    return plaplacian::RadialProblem(params, pl.nonlinearities[0], pl.nonlinearities[1], solver.grid_nodes, seed);
}

} // namespace conefp::config

#endif // CONEFP_CONFIG_HPP
