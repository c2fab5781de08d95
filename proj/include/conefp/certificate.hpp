#ifndef CONEFP_CERTIFICATE_HPP
#define CONEFP_CERTIFICATE_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "conefp/cones.hpp"

namespace conefp::cert {

using Json = nlohmann::ordered_json;

/// One theorem hypothesis evaluated numerically. `margin` is the signed gap
/// in the passing direction (lhs - rhs for a ">" check, rhs - lhs for "<"),
/// so a positive margin always means the inequality holds with room.
struct InequalityRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool pass = false;
};

/// Strict inequalities are accepted only with a scale-relative safety margin:
/// sampled extrema make exact strictness unverifiable.
inline double safety_margin(double rhs) { return 1e-9 * (1.0 + std::fabs(rhs)); }

inline InequalityRecord check_greater(std::string name, double lhs, double rhs) {
    InequalityRecord r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = lhs - rhs;
    r.pass = lhs > rhs + safety_margin(rhs);
    return r;
}

inline InequalityRecord check_less(std::string name, double lhs, double rhs) {
    InequalityRecord r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.pass = lhs < rhs - safety_margin(rhs);
    return r;
}

struct StructuralRecord {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Certificate block for one (alpha, beta) parameter level.
struct LevelCertificate {
    std::array<double, 2> alpha{}, beta{};
    std::array<double, 2> r{}, R{}; // r = min(alpha,beta), R = max
    std::array<double, 2> m{}, M{}; // box extrema of the nonlinearities
    cones::Regime regime = cones::Regime::cc();
    int expected_index = 1;
    std::vector<InequalityRecord> inequalities;
    std::vector<StructuralRecord> structural;
    bool pass = false;

    void finalize() {
        pass = true;
        for (const auto& q : inequalities) pass = pass && q.pass;
        for (const auto& s : structural) pass = pass && s.pass;
    }
};

/// Full machine-checkable certificate: per-level inequality records plus the
/// structural checks that tie levels together.
struct Certificate {
    std::string problem; // "hammerstein" | "plaplacian"
    std::vector<LevelCertificate> levels;
    std::vector<StructuralRecord> structural; // cross-level checks
    bool pass = false;
    Json grid_meta = Json::object();

    void finalize() {
        pass = true;
        for (auto& l : levels) {
            l.finalize();
            pass = pass && l.pass;
        }
        for (const auto& s : structural) pass = pass && s.pass;
    }
};

inline Json to_json(const InequalityRecord& r) {
    return Json{{"name", r.name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"margin", r.margin}, {"pass", r.pass}};
}

inline Json to_json(const StructuralRecord& s) {
    return Json{{"name", s.name}, {"pass", s.pass}, {"detail", s.detail}};
}

inline Json regime_json(const cones::Regime& regime) {
    return Json::array({cones::regime_name(regime.tag[0]), cones::regime_name(regime.tag[1])});
}

inline Json to_json(const LevelCertificate& l) {
    Json j;
    j["alpha"] = l.alpha;
    j["beta"] = l.beta;
    j["r"] = l.r;
    j["R"] = l.R;
    j["m"] = l.m;
    j["M"] = l.M;
    j["regime"] = regime_json(l.regime);
    j["expected_index"] = l.expected_index;
    Json ineq = Json::array();
    for (const auto& q : l.inequalities) ineq.push_back(to_json(q));
    j["inequalities"] = ineq;
    Json st = Json::array();
    for (const auto& s : l.structural) st.push_back(to_json(s));
    j["structural"] = st;
    j["pass"] = l.pass;
    return j;
}

inline Json to_json(const Certificate& c) {
    Json j;
    j["schema"] = 1;
    j["problem"] = c.problem;
    Json levels = Json::array();
    for (const auto& l : c.levels) levels.push_back(to_json(l));
    j["levels"] = levels;
    Json st = Json::array();
    for (const auto& s : c.structural) st.push_back(to_json(s));
    j["structural"] = st;
    j["regime"] = c.levels.empty() ? Json::array() : regime_json(c.levels.front().regime);
    j["expected_index"] = c.levels.empty() ? 0 : c.levels.front().expected_index;
    j["grid_meta"] = c.grid_meta;
    j["pass"] = c.pass;
    return j;
}

} // namespace conefp::cert

#endif // CONEFP_CERTIFICATE_HPP
