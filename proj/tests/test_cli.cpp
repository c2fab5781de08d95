#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "conefp/config.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct RunResult {
    int exit_code;
    fs::path out_dir;
};

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("conefp_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string& subcommand, const fs::path& config, const std::string& tag,
                  const std::string& extra = "") {
    const fs::path out = fresh_dir(tag);
    std::ostringstream cmd;
    cmd << '"' << CONEFP_CLI_PATH << "\" " << subcommand << " --config \"" << config.string() << "\" --out \""
        << out.string() << "\" " << extra << " > \"" << (out / "stdout.txt").string() << "\" 2> \""
        << (out / "stderr.txt").string() << '"';
    const int status = std::system(cmd.str().c_str());
    REQUIRE(status != -1);
    return RunResult{WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    Json j;
    in >> j;
    return j;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const fs::path kConfigs = CONEFP_CONFIG_DIR;

} // namespace

TEST_CASE("check on the bundled three-level example reports the failing record") {
    const auto run = run_cli("check", kConfigs / "example_paper.json", "check_paper");
    REQUIRE(run.exit_code == 2); // one of twelve inequalities fails by arithmetic
    const Json cert = read_json(run.out_dir / "certificate.json");
    REQUIRE(cert["schema"] == 1);
    REQUIRE(cert["problem"] == "hammerstein");
    REQUIRE(cert["levels"].size() == 3);
    int total = 0, passing = 0;
    for (const auto& lvl : cert["levels"])
        for (const auto& q : lvl["inequalities"]) {
            ++total;
            passing += q["pass"].get<bool>() ? 1 : 0;
        }
    REQUIRE(total == 12);
    REQUIRE(passing == 11);
    REQUIRE(cert["levels"][0]["pass"] == true);
    REQUIRE(cert["levels"][1]["pass"] == false);
    REQUIRE(cert["levels"][2]["pass"] == true);
    for (const auto& s : cert["structural"]) REQUIRE(s["pass"] == true);
    REQUIRE(cert["pass"] == false);
    REQUIRE(cert["grid_meta"]["A"][0].get<double>() == Catch::Approx(1.0 / 16).margin(1e-6));
}

TEST_CASE("config validation failures exit with code 1") {
    Json cfg;
    {
        std::ifstream in(kConfigs / "example_paper.json");
        in >> cfg;
    }
    cfg["levels"][0]["beta"][0] = cfg["levels"][0]["alpha"][0]; // alpha_1 == beta_1
    const fs::path mod = fs::temp_directory_path() / "conefp_alpha_eq_beta.json";
    std::ofstream(mod) << cfg.dump(2);
    const auto run = run_cli("check", mod, "check_alpha_eq_beta");
    REQUIRE(run.exit_code == 1);

    Json unknown = cfg;
    unknown["frobnicate"] = true;
    std::ofstream(mod) << unknown.dump(2);
    REQUIRE(run_cli("check", mod, "check_unknown_key").exit_code == 1);
}

TEST_CASE("raising beta2 keeps the certificate failing with exit 2") {
    Json cfg;
    {
        std::ifstream in(kConfigs / "example_paper.json");
        in >> cfg;
    }
    for (auto& lvl : cfg["levels"]) lvl["beta"][1] = 4096.0; // 2^12
    const fs::path mod = fs::temp_directory_path() / "conefp_beta2_raised.json";
    std::ofstream(mod) << cfg.dump(2);
    const auto run = run_cli("check", mod, "check_beta2");
    REQUIRE(run.exit_code == 2);
}

TEST_CASE("solve on the constant config finds the unique solution in two iterations") {
    const auto run = run_cli("solve", kConfigs / "example_constant.json", "solve_constant");
    REQUIRE(run.exit_code == 0);
    const Json summary = read_json(run.out_dir / "summary.json");
    REQUIRE(summary["count"] == 1);
    const auto& sol = summary["solutions"][0];
    REQUIRE(sol["method"] == "picard");
    REQUIRE(sol["iterations"].get<int>() <= 2);
    REQUIRE(sol["residual"].get<double>() < 1e-8);
    REQUIRE(sol["norms"][0].get<double>() == Catch::Approx(0.125).margin(1e-9));
    REQUIRE(fs::exists(run.out_dir / sol["csv"].get<std::string>()));
}

TEST_CASE("solve exits 2 at the check stage when nothing certifies") {
    const auto run = run_cli("solve", kConfigs / "example_zero.json", "solve_zero");
    REQUIRE(run.exit_code == 2);
}

TEST_CASE("skip-check searches anyway and reports nonconvergence with exit 3") {
    const auto run = run_cli("solve", kConfigs / "example_zero.json", "solve_zero_skip", "--skip-check");
    REQUIRE(run.exit_code == 3); // T = 0 has no fixed point inside the box
    const Json summary = read_json(run.out_dir / "summary.json");
    REQUIRE(summary["count"] == 0);
}

TEST_CASE("three-level solve finds the localized solutions through the fallbacks") {
    // reduced grid keeps this quick; picard stalls on the expansive second
    // component and the deflated-newton fallback takes over
    const auto run = run_cli("solve", kConfigs / "example_paper.json", "solve_paper", "--grid 129");
    REQUIRE(run.exit_code == 0);
    const Json summary = read_json(run.out_dir / "summary.json");
    REQUIRE(summary["count"].get<int>() >= 2);
    bool low = false, high = false;
    for (const auto& sol : summary["solutions"]) {
        const double n1 = sol["norms"][0].get<double>();
        const double n2 = sol["norms"][1].get<double>();
        REQUIRE(sol["residual"].get<double>() < 1e-8);
        REQUIRE(n2 > 2.0);
        REQUIRE(n2 < 512.0);
        low = low || (n1 > 1.0 / 512 && n1 < 0.25);
        high = high || (n1 > 64.0 && n1 < 522.0);
        REQUIRE(fs::exists(run.out_dir / sol["csv"].get<std::string>()));
    }
    REQUIRE(low);
    REQUIRE(high);
}

TEST_CASE("radial check and solve work end to end") {
    REQUIRE(run_cli("check", kConfigs / "radial_cc.json", "check_radial").exit_code == 0);
    const auto run = run_cli("solve", kConfigs / "radial_cc.json", "solve_radial");
    REQUIRE(run.exit_code == 0);
    const Json sidecar = read_json(run.out_dir / "solution_1.json");
    REQUIRE(sidecar["iterations"].get<int>() <= 2);
    REQUIRE(sidecar["norms"][0].get<double>() == Catch::Approx(1.0 / 3.0).margin(1e-6));
    REQUIRE(sidecar["phi"][0].get<double>() > 0.01);
    REQUIRE(fs::exists(run.out_dir / "solution_1.csv"));

    // harnack accepts the exported solution
    const fs::path csv = run.out_dir / "solution_1.csv";
    const auto harnack =
        run_cli("harnack", kConfigs / "radial_cc.json", "harnack_radial", "--in \"" + csv.string() + "\"");
    REQUIRE(harnack.exit_code == 0);
    const Json report = read_json(harnack.out_dir / "harnack.json");
    REQUIRE(report["pass"] == true);
}

TEST_CASE("miranda subcommand classifies and solves") {
    const auto golden = run_cli("miranda", kConfigs / "miranda_golden.json", "miranda_golden");
    REQUIRE(golden.exit_code == 0);
    const Json report = read_json(golden.out_dir / "miranda.json");
    REQUIRE(report["found"] == true);
    REQUIRE(report["zero"][0].get<double>() == Catch::Approx((std::sqrt(5.0) - 1.0) / 2.0).margin(1e-8));
    REQUIRE(report["used_newton"] == false);

    const auto linear = run_cli("miranda", kConfigs / "miranda_linear.json", "miranda_linear");
    REQUIRE(linear.exit_code == 0);
    const Json lin = read_json(linear.out_dir / "miranda.json");
    REQUIRE(lin["zero"][0].get<double>() == Catch::Approx(0.5).margin(1e-10));
    REQUIRE(lin["zero"][1].get<double>() == Catch::Approx(0.7).margin(1e-10));

    const auto fail = run_cli("miranda", kConfigs / "miranda_fail.json", "miranda_fail");
    REQUIRE(fail.exit_code == 2);
    const Json failed = read_json(fail.out_dir / "miranda.json");
    for (const auto& face : failed["faces"]) REQUIRE(face["condition"] == "fail");
}

TEST_CASE("reruns produce byte-identical artifacts") {
    const auto a = run_cli("check", kConfigs / "example_constant.json", "determinism_a");
    const auto b = run_cli("check", kConfigs / "example_constant.json", "determinism_b");
    REQUIRE(a.exit_code == b.exit_code);
    REQUIRE(read_file(a.out_dir / "certificate.json") == read_file(b.out_dir / "certificate.json"));

    const auto s1 = run_cli("solve", kConfigs / "radial_cc.json", "determinism_s1");
    const auto s2 = run_cli("solve", kConfigs / "radial_cc.json", "determinism_s2");
    REQUIRE(read_file(s1.out_dir / "summary.json") == read_file(s2.out_dir / "summary.json"));
    REQUIRE(read_file(s1.out_dir / "solution_1.csv") == read_file(s2.out_dir / "solution_1.csv"));
}

TEST_CASE("config layer handles expression kernels and scalar factors") {
    const Json raw = Json::parse(R"({
        "schema": 1,
        "problem": "hammerstein",
        "window": [0.25, 0.75],
        "kernels": [
            {"kind": "expression", "expr": "t*s+0.1", "c": 0.05, "phi": "2", "weight": "s"},
            {"kind": "green_dirichlet"}
        ],
        "nonlinearities": [
            {"expr": "1", "monotone": ["nondecreasing", "nondecreasing"]},
            {"expr": "1", "monotone": ["nondecreasing", "nondecreasing"]}
        ],
        "levels": [{"alpha": [1.0, 1.0], "beta": [0.01, 0.01]}],
        "solver": {"N": 33}
    })");
    const auto cfg = conefp::config::parse(raw);
    REQUIRE(cfg.kind == "hammerstein");
    const auto& k = cfg.hammerstein->kernels[0];
    REQUIRE(k.kind == conefp::hammerstein::KernelKind::Expression);
    REQUIRE(k.k(0.5, 0.5) == Catch::Approx(0.35));
    REQUIRE(k.g(0.3) == Catch::Approx(0.3));
    REQUIRE(k.phi(0.3) == Catch::Approx(2.0));
    const auto problem = conefp::config::make_problem(*cfg.hammerstein, cfg.solver);
    REQUIRE(problem.grid_size() == 33);

    Json bad = raw;
    bad["kernels"][0].erase("c"); // expression kernels need an explicit c
    REQUIRE_THROWS_AS(conefp::config::parse(bad), conefp::config::ConfigError);
}

TEST_CASE("usage errors exit with code 1") {
    const int status = std::system((std::string("\"") + CONEFP_CLI_PATH + "\" check > /dev/null 2>&1").c_str());
    REQUIRE(WIFEXITED(status));
    REQUIRE(WEXITSTATUS(status) == 1); // missing --config
    const auto missing = run_cli("check", fs::path("/nonexistent/config.json"), "missing_config");
    REQUIRE(missing.exit_code == 1);
}
