#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fdx/cli.hpp"
#include "fdx/weight.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fdx");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = fdx::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("fdx_cli_test_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

// a4 with the integration order swapped, by Gauss-Kronrod.
double a4_oracle(double mu, int n) {
    const fdx::BumpSpec spec{mu, n};
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto src = [&](double t) { return std::pow(t, n - 1.0) * fdx::eta1(spec, t); };
    const double j = GK::integrate(
        [&](double t) { return src(t) * (std::pow(t, 2.0 - n) - std::pow(2.0, 2.0 - n)) / (n - 2.0); }, 1.0, 2.0, 15,
        1e-14);
    const double a5 = GK::integrate(src, 1.0, 2.0, 15, 1e-14);
    const double k0 = (std::pow(2.0, 2.0 - n) * a5 + (n - 2.0 - mu) * std::pow(2.0, -mu)) / (n - 2.0);
    return 1.0 / (j + k0);
}

}  // namespace

TEST_CASE("profile command") {
    const auto dir = fresh_dir("profile");
    const auto r = run_cli({"profile", "--n", "3", "--m", "0.2", "--gamma", "4", "--eta", "1", "--stride", "20",
                            "--out", dir.string()});
    REQUIRE(r.code == fdx::cli::kExitOk);
    const json summary = json::parse(slurp(dir / "profile.json"));
    CHECK(summary["eta_origin"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
    for (const char* k : {"eta_origin", "eta_inf", "fp_residual", "ode_residual_max", "iterations"}) {
        CHECK(summary.contains(k));
    }
    CHECK(summary["ode_residual_max"].get<double>() <= 1e-5);
    std::ifstream csv(dir / "profile.csv");
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == "s,r,h,wt,f,rfr_over_f");
    CHECK(std::count(row.begin(), row.end(), ',') == 5);

    const json manifest = json::parse(slurp(dir / "profile_manifest.json"));
    for (const char* k : {"alpha", "beta", "C1", "C2", "C3", "C4", "C5", "b0", "b1", "a1", "a2", "a3", "a4"}) {
        CHECK(manifest["derived"].contains(k));
    }
    CHECK(manifest["derived"]["C3"].get<double>() == doctest::Approx(31.0 / 60.0).epsilon(1e-14));
}

TEST_CASE("missing required flag writes nothing") {
    const auto dir = fresh_dir("missing");
    const auto r = run_cli({"profile", "--n", "3", "--m", "0.2", "--out", dir.string()});
    CHECK(r.code == fdx::cli::kExitConfig);
    CHECK(!fs::exists(dir));
    const json rec = json::parse(r.err);
    CHECK(rec["error"] == "ConfigError");
    CHECK(rec["exit_code"] == 2);

    const auto w = run_cli({"weight", "--n", "3", "--out", dir.string()});
    CHECK(w.code == fdx::cli::kExitConfig);
    CHECK(!fs::exists(dir));
    CHECK(run_cli({}).code == fdx::cli::kExitConfig);
    CHECK(run_cli({"nonsense"}).code == fdx::cli::kExitConfig);
}

TEST_CASE("weight command") {
    const auto dir = fresh_dir("weight");
    const auto r = run_cli({"weight", "--mu", "0.5", "--n", "3", "--nodes", "41", "--out", dir.string()});
    REQUIRE(r.code == fdx::cli::kExitOk);
    std::ifstream csv(dir / "weight.csv");
    std::string header, cols;
    std::getline(csv, header);
    std::getline(csv, cols);
    CHECK(cols == "r,phi,dphi");
    const auto pos = header.find("a4=");
    REQUIRE(pos != std::string::npos);
    const double a4 = std::stod(header.substr(pos + 3));
    CHECK(std::abs(a4 - a4_oracle(0.5, 3)) <= 1e-8 * a4);
    CHECK(header.find("mu=0.5 n=3") != std::string::npos);

    // mu = n - 2 has no decaying weight.
    const auto bad = fresh_dir("weight_bad");
    CHECK(run_cli({"weight", "--mu", "1", "--n", "3", "--out", bad.string()}).code == fdx::cli::kExitConfig);
    CHECK(!fs::exists(bad));
}

TEST_CASE("outputs are deterministic and FDX_OUT overrides --out") {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    const auto ignored = fresh_dir("det_ignored");
    REQUIRE(run_cli({"weight", "--mu", "0.25", "--n", "3", "--out", a.string()}).code == 0);
    ::setenv("FDX_OUT", b.string().c_str(), 1);
    const auto r = run_cli({"weight", "--mu", "0.25", "--n", "3", "--out", ignored.string()});
    ::unsetenv("FDX_OUT");
    REQUIRE(r.code == 0);
    CHECK(!fs::exists(ignored));
    for (const char* f : {"weight.csv", "weight.json", "weight_manifest.json"}) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("parameter file") {
    const auto dir = fresh_dir("params");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "p.json");
        f << R"({"n": 3, "m": 0.2, "gamma": 4, "rho1": 1, "eta_inf": 2, "b1_margin": 0.1})";
    }
    const auto out = dir / "out";
    REQUIRE(run_cli({"profile", "--params", (dir / "p.json").string(), "--stride", "100", "--out", out.string()})
                .code == 0);
    const json m = json::parse(slurp(out / "profile_manifest.json"));
    CHECK(m["params"]["eta_inf"].get<double>() == 2.0);
    CHECK(m["params"]["b1_margin"].get<double>() == 0.1);
    CHECK(json::parse(slurp(out / "profile.json"))["eta_inf"].get<double>() == doctest::Approx(2.0).epsilon(1e-8));

    {
        std::ofstream f(dir / "broken.json");
        f << "{\"n\": 3,";
    }
    CHECK(run_cli({"profile", "--params", (dir / "broken.json").string(), "--out", (dir / "x").string()}).code ==
          fdx::cli::kExitConfig);
    CHECK(!fs::exists(dir / "x"));
}

TEST_CASE("numerical failure maps to exit 3") {
    const auto dir = fresh_dir("numfail");
    // An unreachable Newton tolerance forces step halving below dt_min.
    const auto r = run_cli({"evolve", "--n", "3", "--m", "0.2", "--gamma", "4", "--nodes", "65", "--newton-tol",
                            "1e-300", "--dt-min", "1e-6", "--out", dir.string()});
    CHECK(r.code == fdx::cli::kExitNumerical);
    CHECK(json::parse(r.err)["error"] == "NewtonDivergence");
    CHECK(!fs::exists(dir));
}

TEST_CASE("time-series commands") {
    const std::vector<std::string> common{"--n", "3", "--m", "0.2", "--gamma", "4", "--nodes", "129",
                                          "--samples", "10", "--tau-max", "1"};
    for (const std::string cmd : {"evolve", "contract", "converge"}) {
        const auto dir = fresh_dir(cmd);
        std::vector<std::string> args{cmd};
        args.insert(args.end(), common.begin(), common.end());
        if (cmd == "contract") args.insert(args.end(), {"--pairs", "2"});
        args.insert(args.end(), {"--out", dir.string()});
        const auto r = run_cli(args);
        REQUIRE(r.code == 0);
        std::ifstream csv(dir / (cmd + ".csv"));
        std::string header;
        std::getline(csv, header);
        CHECK(header.rfind("t,tau,dist_L1w,dist_sup_compact", 0) == 0);
        const json m = json::parse(slurp(dir / (cmd + "_manifest.json")));
        CHECK(m.contains("evolve_config"));
        CHECK(m["grid"]["nodes"] == 129);
        CHECK(m["derived"].contains("a4"));
    }
}
