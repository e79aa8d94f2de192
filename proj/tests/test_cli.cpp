#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "robust_resolve_cli.hpp"

using namespace robust_resolve;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

using Row = std::map<std::string, std::string>;

std::vector<Row> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    std::vector<Row> rows;
    auto split = [](const std::string& l) {
        std::vector<std::string> f;
        std::stringstream ss(l);
        std::string x;
        while (std::getline(ss, x, ',')) f.push_back(x);
        if (!l.empty() && l.back() == ',') f.emplace_back();
        return f;
    };
    if (!std::getline(in, line)) return rows;
    header = split(line);
    while (std::getline(in, line)) {
        auto f = split(line);
        Row r;
        for (std::size_t i = 0; i < header.size() && i < f.size(); ++i) r[header[i]] = f[i];
        rows.push_back(r);
    }
    return rows;
}

double num(const Row& r, const std::string& key) { return std::stod(r.at(key)); }

fs::path source(const std::string& rel) { return fs::path(ROBUST_RESOLVE_SOURCE_DIR) / rel; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_file(const std::string& name, const std::string& content) {
    auto p = fs::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

// Byte comparison against tests/golden; ROBUST_RESOLVE_UPDATE_GOLDEN=1 rewrites the file instead.
void expect_golden(const std::string& name, const std::string& actual) {
    auto path = source("tests/golden/" + name);
    if (const char* u = std::getenv("ROBUST_RESOLVE_UPDATE_GOLDEN"); u && std::string(u) == "1") {
        std::ofstream(path) << actual;
        return;
    }
    ASSERT_TRUE(fs::exists(path)) << path;
    EXPECT_EQ(slurp(path), actual) << name;
}

}  // namespace

TEST(CliResolution, NoCorruptionIsHalfDeltaSquared) {
    auto r = run({"resolution", "--alpha", "0", "--delta-max", "3", "--delta-step", "0.25"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 13u);
    for (const auto& row : rows) EXPECT_NEAR(num(row, "r"), 0.5 * num(row, "delta") * num(row, "delta"), 1e-5);
}

TEST(CliResolution, GoldenRows) {
    auto r = run({"resolution", "--alpha", "0.1", "--delta-max", "2", "--delta-step", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(num(rows[0], "r"), 0.0);
    EXPECT_EQ(rows[0].at("overlap"), "1");
    EXPECT_NEAR(num(rows[2], "r"), 0.43, 1e-2);
    EXPECT_NEAR(num(rows[2], "r"), 0.4357507, 1e-6);
    expect_golden("resolution_alpha01.csv", r.out);
    expect_golden("resolution_alpha0.csv", run({"resolution", "--alpha", "0", "--delta-max", "2", "--delta-step", "0.5"}).out);
}

TEST(CliResolution, DensitiesIntegrateToOne) {
    auto r = run({"resolution", "--densities", "--delta-max", "2", "--alpha", "0.1", "--grid-n", "801"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 801u);
    const double h = num(rows[1], "xi") - num(rows[0], "xi");
    double m = 0, p = 0, q = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m += num(rows[i], "q_minus") * h;
        p += num(rows[i], "q_plus") * h;
        q += num(rows[i], "p_hat_star") * h;
        const auto& mirror = rows[rows.size() - 1 - i];
        ASSERT_NEAR(num(mirror, "xi"), -num(rows[i], "xi"), 1e-9);
        EXPECT_NEAR(num(rows[i], "q_minus"), num(mirror, "q_plus"), 1e-9);
    }
    EXPECT_NEAR(m, 1.0, 1e-8);
    EXPECT_NEAR(p, 1.0, 1e-8);
    EXPECT_NEAR(q, 1.0, 1e-8);
}

TEST(CliResolution, WarnsOnNonMonotoneCurve) {
    auto r = run({"resolution", "--alpha", "0.1", "--delta-max", "3", "--grid-span", "0.05"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning: resolution curve decreases"), std::string::npos);
}

TEST(CliRadius, WorstCase) {
    auto a = parse_csv(run({"radius", "--r", "0.43", "--alpha", "0.1"}).out);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_NEAR(num(a[0], "kappa"), 2.0, 0.05);
    EXPECT_EQ(a[0].at("mode"), "worst_case");
    auto z = parse_csv(run({"radius", "--r", "0", "--alpha", "0.1"}).out);
    EXPECT_NEAR(num(z[0], "kappa"), 0.2533, 2e-3);
    expect_golden("radius_043.csv", run({"radius", "--r", "0.43", "--alpha", "0.1"}).out);
}

TEST(CliRadius, InfinitySerialization) {
    auto csv = run({"radius", "--r", "0.9", "--alpha", "0.1"});
    ASSERT_EQ(csv.code, 0);
    auto rows = parse_csv(csv.out);
    EXPECT_EQ(rows[0].at("kappa"), "inf");
    EXPECT_EQ(rows[0].at("witness_theta"), "");
    auto js = run({"radius", "--r", "0.9", "--alpha", "0.1", "--format", "json"});
    ASSERT_EQ(js.code, 0);
    auto doc = nlohmann::json::parse(js.out);
    EXPECT_EQ(doc["schema_version"], 1);
    EXPECT_EQ(doc["command"], "radius");
    EXPECT_TRUE(doc["rows"][0]["kappa"].is_null());
    EXPECT_EQ(doc["rows"][0]["kappa_infinite"], true);
    auto fin = nlohmann::json::parse(run({"radius", "--r", "0.43", "--alpha", "0.1", "--format", "json"}).out);
    EXPECT_EQ(fin["rows"][0]["kappa_infinite"], false);
    EXPECT_NEAR(fin["rows"][0]["kappa"].get<double>(), 2.0, 0.05);
}

TEST(CliRadius, AlmostSureIsFiniteBeyondThreshold) {
    auto r = run({"radius", "--r", "0.9", "--alpha", "0.1", "--almost-sure"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    EXPECT_EQ(rows[0].at("mode"), "almost_sure");
    EXPECT_NEAR(num(rows[0], "kappa"), 2.27, 0.1);
    EXPECT_NEAR(num(rows[0], "threshold"), 1.757780, 1e-6);
}

TEST(CliConfset, LeastFavorableObservation) {
    auto r = run({"confset", "--least-favorable", "2", "--alpha", "0.1", "--r", "0.43", "--theta-lo", "-3", "--theta-hi", "3",
                  "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc["rows"].size(), 2u);
    EXPECT_NEAR(doc["rows"][0]["lo"].get<double>(), -2.0, 0.05);
    EXPECT_NEAR(doc["rows"][0]["hi"].get<double>(), -0.83, 0.05);
    EXPECT_NEAR(doc["rows"][1]["lo"].get<double>(), 0.83, 0.05);
    EXPECT_NEAR(doc["rows"][1]["hi"].get<double>(), 2.0, 0.05);
    EXPECT_NEAR(doc["region_radius"].get<double>(), 2.0, 0.05);
    expect_golden("confset_least_favorable.csv",
                  run({"confset", "--least-favorable", "2", "--alpha", "0.1", "--r", "0.43", "--theta-lo", "-3", "--theta-hi", "3"}).out);
}

TEST(CliConfset, MixtureWithResidual) {
    auto r = run({"--config", source("recipes/fig_dro_residual.toml").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc["rows"].size(), 2u);
    EXPECT_LE(doc["rows"][0]["lo"].get<double>(), 0.0);
    EXPECT_GE(doc["rows"][0]["hi"].get<double>(), 0.0);
    ASSERT_EQ(doc["residual"].size(), 221u);
    double at_zero = kInf;
    for (const auto& p : doc["residual"])
        if (std::abs(p["theta"].get<double>()) < 1e-9) at_zero = p["residual"].get<double>();
    EXPECT_LE(at_zero, 1e-4);
}

TEST(CliConfset, FromData) {
    // binned samples sit far from the model in KL, so the region needs a large r
    std::string csv = "xi\n";
    for (int i = 0; i < 41; ++i) {
        const double u = (i + 0.5) / 41.0;
        csv += std::to_string(boost::math::quantile(boost::math::normal(), u)) + "\n";
    }
    auto path = temp_file("rr_cli_confset.csv", csv);
    std::vector<std::string> args{"confset", "--data", path.string(), "--alpha", "0.1", "--r", "2", "--theta-lo", "-3", "--theta-hi", "3"};
    auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_LT(num(rows[0], "lo"), 0.0);
    EXPECT_GT(num(rows[0], "hi"), 0.0);
    EXPECT_NEAR(num(rows[0], "lo"), -num(rows[0], "hi"), 1e-6);
    args[6] = "0.5";
    EXPECT_TRUE(parse_csv(run(args).out).empty());
    fs::remove(path);
}

TEST(CliConfset, NeedsExactlyOneSource) {
    EXPECT_EQ(run({"confset", "--r", "0.4"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"confset", "--r", "0.4", "--least-favorable", "2", "--mixture", "1:0"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"confset", "--r", "0.4", "--mixture", "1;0"}).code, cli::kExitConfig);
}

TEST(CliPhase, CellsAndRows) {
    auto r = run({"phase", "--r-grid", "0:1.8:7", "--alpha-grid", "0:0.2:3"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 21u);
    for (const auto& row : rows) {
        double rr = num(row, "r"), a = num(row, "alpha");
        if (a == 0.0 && rr > 0.0) {
            EXPECT_EQ(row.at("regime"), "MeanRegime");
        }
        if (rr == 0.0) {
            EXPECT_EQ(row.at("regime"), "MedianRegime");
        }
        if (a > 0.0 && rr >= rbar_prime(a)) {
            EXPECT_EQ(row.at("regime"), "Unreachable") << rr << " " << a;
        }
        if (row.at("kappa") != "inf" && row.at("kappa_prime") != "inf") {
            EXPECT_LE(num(row, "kappa_prime"), num(row, "kappa") + 2e-2);
        }
    }
    auto cell = parse_csv(run({"phase", "--r-grid", "0.05:0.05:1", "--alpha-grid", "0.1:0.1:1"}).out);
    ASSERT_EQ(cell.size(), 1u);
    EXPECT_EQ(cell[0].at("regime"), "FiniteBoth");
    EXPECT_NEAR(num(cell[0], "kappa"), 0.66, 0.03);
    EXPECT_NEAR(num(cell[0], "kappa_prime"), 0.66, 0.03);
}

TEST(CliPhase, RejectsBadGrids) {
    EXPECT_EQ(run({"phase", "--r-grid", "1:0:3"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"phase", "--alpha-grid", "0:0.7:3"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"phase", "--r-grid", "0:1"}).code, cli::kExitConfig);
}

TEST(CliEstimate, Examples) {
    auto d1 = temp_file("rr_cli_123.csv", "1\n2\n3\n");
    auto d2 = temp_file("rr_cli_0010.csv", "0\n0\n10\n");
    auto mean = parse_csv(run({"estimate", "--data", d1.string(), "--estimator", "mean"}).out);
    EXPECT_EQ(num(mean[0], "estimate"), 2.0);
    EXPECT_EQ(mean[0].at("k"), "inf");
    auto med = parse_csv(run({"estimate", "--data", d2.string(), "--estimator", "median", "--width", "1"}).out);
    EXPECT_EQ(num(med[0], "estimate"), 0.0);
    EXPECT_EQ(num(med[0], "lo"), -1.0);
    EXPECT_EQ(num(med[0], "hi"), 1.0);
    auto hub = run({"estimate", "--data", d2.string(), "--estimator", "huber", "--delta", "2", "--alpha", "0.1", "--format", "json"});
    ASSERT_EQ(hub.code, 0) << hub.err;
    auto doc = nlohmann::json::parse(hub.out);
    EXPECT_EQ(doc["rows"][0]["estimator"], "huber");
    EXPECT_FALSE(doc["rows"][0]["k_infinite"].get<bool>());
    expect_golden("estimate_huber.json", hub.out);
    auto warn = run({"estimate", "--data", d1.string(), "--estimator", "huber", "--delta", "0.1", "--alpha", "0.1"});
    EXPECT_EQ(warn.code, 0);
    EXPECT_NE(warn.err.find("median"), std::string::npos);
    EXPECT_EQ(run({"estimate", "--data", d1.string(), "--estimator", "trimmed"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"estimate"}).code, cli::kExitConfig);
    fs::remove(d1);
    fs::remove(d2);
}

TEST(CliSimulate, HuberSlope) {
    auto r = run({"--config", source("recipes/example_huber_coverage.toml").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = nlohmann::json::parse(r.out);
    ASSERT_FALSE(doc["slope"].is_null());
    EXPECT_LE(doc["slope"].get<double>(), -0.32);
    ASSERT_EQ(doc["rows"].size(), 4u);
    EXPECT_EQ(doc["rows"][0]["seed"], 7);
}

TEST(CliSimulate, CsvColumnsAndDeterminism) {
    std::vector<std::string> args{"simulate", "--model", "outlier", "--estimator", "median", "--delta", "0.5", "--n-list", "20,40",
                                  "--trials", "200", "--seed", "3"};
    auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "estimator,n,trials,failures,rate,exponent_estimate,seed,tilted,std_error");
    args.back() = "4";
    EXPECT_NE(run(args).out, a.out);
    EXPECT_EQ(run({"simulate", "--n-list", "10,x"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"simulate", "--model", "outlier", "--sampling", "tilted", "--n-list", "5", "--trials", "5"}).code, cli::kExitConfig);
}

TEST(CliExitCodes, ConfigAndSolverErrors) {
    EXPECT_EQ(run({}).code, cli::kExitConfig);
    EXPECT_EQ(run({"radius"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"radius", "--r", "0.1", "--alpha", "0.7"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"radius", "--r", "0.1", "--family", "cauchy"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"radius", "--r", "0.1", "--format", "xml"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"radius", "--r", "0.1", "--sigma", "-1"}).code, cli::kExitConfig);
    EXPECT_EQ(run({"radius", "--r", "0.1", "--family", "table"}).code, cli::kExitConfig);
    auto solver = run({"radius", "--r", "0.2", "--grid-n", "3"});
    EXPECT_EQ(solver.code, cli::kExitSolver);
    EXPECT_NE(solver.err.find("solver error"), std::string::npos);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(CliOutput, WritesFile) {
    auto path = fs::temp_directory_path() / "rr_cli_out.csv";
    auto r = run({"radius", "--r", "0.43", "--out", path.string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(slurp(path), run({"radius", "--r", "0.43"}).out);
    fs::remove(path);
    EXPECT_EQ(run({"radius", "--r", "0.43", "--out", "/nonexistent-dir/x.csv"}).code, cli::kExitConfig);
}

TEST(CliRecipes, AllParse) {
    // every recipe names exactly one subcommand and only known keys
    for (const auto& e : fs::directory_iterator(source("recipes"))) {
        if (e.path().extension() != ".toml") continue;
        std::ifstream in(e.path());
        std::string line;
        int sections = 0;
        while (std::getline(in, line))
            if (!line.empty() && line[0] == '[') ++sections;
        EXPECT_EQ(sections, 1) << e.path();
    }
    auto r = run({"--config", source("recipes/example_worst_case_radius.toml").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(num(parse_csv(r.out)[0], "kappa"), 2.0, 0.05);
    auto lf = run({"--config", source("recipes/fig_least_favorable.toml").string()});
    ASSERT_EQ(lf.code, 0) << lf.err;
    EXPECT_EQ(parse_csv(lf.out).size(), 801u);
}
