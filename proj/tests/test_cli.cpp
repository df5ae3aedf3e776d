#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cuspmi/cli/app.hpp"
#include "oracles.hpp"

using namespace cuspmi;
using cli::json;

namespace {

struct Result {
    int code;
    std::string out, err;
    json doc() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "cuspmi");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

cplx as_cplx(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

/// Scratch directory with no default config file; the env override is cleared.
class CliEnv : public ::testing::Test {
protected:
    void SetUp() override {
        unsetenv(cli::config_env);
        dir_ = std::filesystem::temp_directory_path() /
               ("cuspmi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        std::filesystem::create_directories(dir_);
        old_ = std::filesystem::current_path();
        std::filesystem::current_path(dir_);
    }
    void TearDown() override {
        std::filesystem::current_path(old_);
        std::filesystem::remove_all(dir_);
        unsetenv(cli::config_env);
    }
    std::string file(const std::string& name, const std::string& body) {
        std::ofstream(dir_ / name) << body;
        return (dir_ / name).string();
    }
    std::filesystem::path dir_, old_;
};

}  // namespace

TEST_F(CliEnv, DimensionExample) {
    const auto r = run({"dim", "--k", "16", "--k1", "12"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    EXPECT_EQ(d["dim_Mk_rho"], 19);
    EXPECT_EQ(d["dim_M2c"], 23);
    EXPECT_EQ(d["config"]["C"], 40);
    EXPECT_EQ(d["config"]["form"], "delta");
}

TEST_F(CliEnv, DimensionTableAsCsv) {
    const auto r = run({"dim", "--table", "40", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "k,k1,dim_Mk_rho,dim_M2c");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 171);
}

TEST_F(CliEnv, PeriodOfDeltaAtS) {
    const auto r = run({"period", "--form", "delta", "--gamma", "S"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    ASSERT_EQ(d["coeffs"].size(), 11u);
    EXPECT_EQ(d["gamma"], json::array({0, -1, 1, 0}));
    EXPECT_TRUE(d.contains("tail"));
    // against the direct base-point integral
    const PolyC base = period_poly_base(delta_q(120), GroupElement::S(), Sign::Plus, cplx(0.3, 1.4));
    std::vector<cplx> got;
    for (const auto& c : d["coeffs"]) got.push_back(as_cplx(c));
    EXPECT_LE(rel_diff(PolyC(got), base), 1e-9);
}

TEST_F(CliEnv, GammaAsMatrixMatchesWord) {
    const auto a = run({"period", "--gamma", "TSt"}), b = run({"period", "--gamma", "1,-2,1,-1"});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(a.doc()["coeffs"], b.doc()["coeffs"]);
    EXPECT_EQ(run({"period", "--gamma", "1,1,1,1"}).code, 1);
    EXPECT_EQ(run({"period", "--gamma", "SX"}).code, 1);
}

TEST_F(CliEnv, PeriodCsvHasOneRowPerDegree) {
    const auto r = run({"period", "--format", "csv"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 12);
    EXPECT_EQ(r.out.substr(0, 13), "degree,re,im\n");
}

TEST_F(CliEnv, EvalSerialisesComplexPairs) {
    const auto r = run({"eval", "--x", "0.25", "--y", "1.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    const auto want = oracle::delta_product(cplx(0.25, 1.5));
    EXPECT_LE(oracle::rel(as_cplx(d["value"]), want), 1e-12);
    EXPECT_GE(d["tail"].get<double>(), 0.0);
}

TEST_F(CliEnv, LValueRoutesAgree) {
    const auto a = run({"lvalue", "9", "--method", "series"}), b = run({"lvalue", "9", "--method", "extraction"});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_LE(oracle::rel(as_cplx(a.doc()["value"]), as_cplx(b.doc()["value"])), 1e-7);
    EXPECT_EQ(run({"lvalue", "3"}).doc()["method"], "extraction");
    EXPECT_EQ(run({"lvalue"}).code, 1);
}

TEST_F(CliEnv, NumericOutputsCarryErrorFields) {
    for (const auto& cmd : std::vector<std::vector<std::string>>{
             {"eval"}, {"period"}, {"lvalue", "8"}, {"eisenstein", "--r", "7", "--s", "7"}, {"phi"},
             {"fourier", "--y", "1.0"}, {"iterated", "--depth", "3"}}) {
        const auto r = run(cmd);
        ASSERT_EQ(r.code, 0) << cmd[0] << ": " << r.err;
        EXPECT_TRUE(r.doc().contains("tail")) << cmd[0];
        EXPECT_TRUE(r.doc().contains("config")) << cmd[0];
    }
}

TEST_F(CliEnv, PhiMatchesLibrary) {
    const auto r = run({"phi", "--sign", "minus", "--x", "0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    const auto v = phi(delta_q(120), BiWeight::make(10, 10), Sign::Minus, cplx(0.5, 2.0));
    ASSERT_EQ(d["coeffs"].size(), 11u);
    for (std::size_t i = 0; i < 11; ++i) EXPECT_EQ(as_cplx(d["coeffs"][i]), v.value[i]) << i;
    EXPECT_EQ(d["weights"], json::array({10, 10}));
    EXPECT_EQ(d["trunc"]["C"], 40);
}

TEST_F(CliEnv, IteratedDepthThreeTable) {
    const auto r = run({"iterated", "--depth", "3", "--y", "1.0"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    EXPECT_EQ(d["coeffs"].size(), 11u);
    EXPECT_EQ(d["coeffs"][0].size(), 11u);
    EXPECT_LE(d["order_check"]["worst_residual"].get<double>(), 1e-5);
    EXPECT_EQ(run({"iterated", "--depth", "4"}).code, 1);
}

TEST_F(CliEnv, ChecksPassAndFail) {
    EXPECT_EQ(run({"check", "vvdim"}).code, 0);
    const auto r = run({"check", "cocycle"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(r.doc()["passed"].get<bool>());
    // an unattainable finite-difference tolerance must surface as a failed suite
    const auto f = run({"check", "keypr", "--fd_tol", "1e-30"});
    EXPECT_EQ(f.code, 3);
    EXPECT_FALSE(f.doc()["passed"].get<bool>());
    EXPECT_EQ(run({"check", "nosuchsuite"}).code, 1);
}

TEST_F(CliEnv, ExitCodes) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"dim", "--k", "15"}).code, 1);
    EXPECT_EQ(run({"dim", "--nonsense"}).code, 1);
    EXPECT_EQ(run({"eval", "--y", "0.01"}).code, 2);
    EXPECT_EQ(run({"phi", "--r", "6", "--s", "6"}).code, 2);
    EXPECT_EQ(run({"eval", "--form", "nope"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"eval", "--format", "xml"}).code, 1);
}

TEST_F(CliEnv, ConfigPrecedence) {
    const auto cfg = file("a.conf", "C=20\nD=300\nr=9\ns=9\n");
    const auto env = file("b.conf", "C=30\n");
    EXPECT_EQ(run({"dim"}).doc()["config"]["C"], 40);

    file("cuspmi.conf", "C=25\n");
    EXPECT_EQ(run({"dim"}).doc()["config"]["C"], 25);

    setenv(cli::config_env, env.c_str(), 1);
    EXPECT_EQ(run({"dim"}).doc()["config"]["C"], 30);

    const auto d = run({"dim", "--config", cfg}).doc()["config"];
    EXPECT_EQ(d["C"], 20);
    EXPECT_EQ(d["D"], 300);
    EXPECT_EQ(d["r"], 9);

    const auto e = run({"dim", "--config", cfg, "--C", "50"}).doc()["config"];
    EXPECT_EQ(e["C"], 50);
    EXPECT_EQ(e["D"], 300);
    // global flags may follow the subcommand
    EXPECT_EQ(run({"dim", "--C", "60"}).doc()["config"]["C"], 60);
}

TEST_F(CliEnv, BadConfigIsUsageError) {
    EXPECT_EQ(run({"dim", "--config", "missing.conf"}).code, 1);
    EXPECT_EQ(run({"dim", "--config", file("x.conf", "bogus=1\n")}).code, 1);
    EXPECT_EQ(run({"dim", "--config", file("y.conf", "C=abc\n")}).code, 1);
}

TEST_F(CliEnv, RepeatedRunsAreBitwiseIdentical) {
    const std::vector<std::string> cmd{"phi", "--x", "0.3", "--y", "1.7"};
    const auto a = run(cmd), b = run(cmd);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliEnv, ThreadCountKeepsResultsWithinReductionContract) {
    const auto a = run({"phi", "--threads", "1"}).doc(), b = run({"phi", "--threads", "4"}).doc();
    EXPECT_EQ(b["config"]["threads"], 4);
    for (std::size_t i = 0; i < a["coeffs"].size(); ++i)
        EXPECT_LE(std::abs(as_cplx(a["coeffs"][i]) - as_cplx(b["coeffs"][i])), 1e-12 * (1.0 + std::abs(as_cplx(a["coeffs"][i]))));
}
