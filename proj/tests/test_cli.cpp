#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "routecorr/bench.hpp"
#include "routecorr/routegen.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("routecorr_cli_" + name); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const auto out = tmp("stdout.txt");
  const std::string cmd = std::string(ROUTECORR_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(Cli, RoutesEfficient) {
  auto r = run("routes --network mesh2x2 --od 1-9");
  ASSERT_EQ(r.code, 0);
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 7u);
  EXPECT_EQ(ls[0], "route_index,link_sequence,impedance");
  EXPECT_EQ(ls[1].substr(0, 2), "0,");
}

TEST(Cli, RoutesSampleIsSubsetOfEfficientOnMesh) {
  auto r = run("routes --network mesh2x2 --mode sample --draws 500 --cv 0.3 --seed 3");
  ASSERT_EQ(r.code, 0);
  auto ls = lines(r.out);
  EXPECT_GE(ls.size(), 2u);
  EXPECT_LE(ls.size(), 7u);
}

TEST(Cli, ProbsClosedFormMatchesLibrary) {
  auto r = run("probs --network fourlink --model lnl-const --cv 0.2 --dmin 0.3");
  ASSERT_EQ(r.code, 0);
  auto fx = routecorr::builtin_network("fourlink");
  auto cs = routecorr::enumerate_efficient_routes(fx.network, fx.od);
  auto p = routecorr::model_probabilities(routecorr::ModelKind::LnlConst, fx.network, cs, 0.2, 0.3);
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), cs.size() + 1);
  EXPECT_EQ(ls[0], "route_index,probability");
  for (std::size_t k = 0; k < cs.size(); ++k) {
    auto comma = ls[k + 1].find(',');
    EXPECT_NEAR(std::stod(ls[k + 1].substr(comma + 1)), p[k], 1e-13);
  }
}

TEST(Cli, ProbsMnpHasStdError) {
  auto r = run("probs --model mnp --draws 10000 --seed 7");
  ASSERT_EQ(r.code, 0);
  auto ls = lines(r.out);
  EXPECT_EQ(ls[0], "route_index,probability,std_error");
  EXPECT_EQ(ls.size(), 7u);
  EXPECT_EQ(run("probs --model mnp --draws 10000 --seed 7").out, r.out);
}

TEST(Cli, CorrRcmSkipsReference) {
  auto r = run("corr --model mnp --space rcm --rcm-ref 2");
  ASSERT_EQ(r.code, 0);
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 1u + 25u);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    EXPECT_NE(ls[i].substr(0, 2), "2,");
  }
  auto full = run("corr --model conl --dmin 0.2");
  ASSERT_EQ(full.code, 0);
  EXPECT_EQ(lines(full.out).size(), 37u);
}

TEST(Cli, ConlStructureRecords) {
  auto r = run("conl-structure --network fourlink");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("record,component,link,routes,value,clamped"), std::string::npos);
  EXPECT_NE(r.out.find("weight,0,,,1,"), std::string::npos);
  EXPECT_NE(r.out.find("delta,,2,1;2,"), std::string::npos);
  EXPECT_NE(r.out.find("residual,,2,"), std::string::npos);
}

TEST(Cli, BenchWritesAllFilesAndConfigMatchesFlags) {
  const auto d1 = tmp("bench1"), d2 = tmp("bench2");
  fs::remove_all(d1);
  fs::remove_all(d2);
  ASSERT_EQ(run("bench --network mesh2x2 --od 1-9 --models mnl,conl --weights 25 --dmin 0:1:0.5 --cv 0.1 "
                "--draws 20000 --seed 42 --out " +
                d1.string())
                .code,
            0);
  const auto cfg = tmp("bench.cfg");
  {
    std::ofstream f(cfg);
    f << "# grid\nnetwork = mesh2x2\nod=1-9\nmodels=mnl,conl\ndmin=0,0.5,1\ncv=0.1\ndraws=99\nseed=42\n";
  }
  ASSERT_EQ(run("bench --config " + cfg.string() + " --draws 20000 --out " + d2.string()).code, 0);
  for (auto name : {"table.csv", "mnp_target.csv", "curve_prob_cv0.1.csv", "curve_fcm.csv", "curve_rcm.csv"}) {
    ASSERT_TRUE(fs::exists(d1 / name)) << name;
    EXPECT_EQ(slurp(d1 / name), slurp(d2 / name)) << name;
  }
  EXPECT_EQ(lines(slurp(d1 / "table.csv")).size(), 1u + 2 * 3);
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove(cfg);
}

TEST(Cli, ValidationErrorsExitTwo) {
  EXPECT_EQ(run("probs --network mesh2x2 --od 1-99").code, 2);
  EXPECT_EQ(run("probs --cv notanumber").code, 2);
  EXPECT_EQ(run("probs --model probit").code, 2);
  EXPECT_EQ(run("bench --dmin 1:0:0.1 --draws 10").code, 2);
  EXPECT_EQ(run("bench --models mnl,foo --draws 10").code, 2);
  EXPECT_EQ(run("probs --config /nonexistent.cfg").code, 2);
  EXPECT_EQ(run("routes --network fourlink:q=3").code, 2);
  EXPECT_EQ(run("").code, 2);

  const auto bad = tmp("bad.net");
  {
    std::ofstream f(bad);
    f << "link 1 1 2 -3\n";
  }
  EXPECT_EQ(run("routes --network " + bad.string() + " --od 1-2").code, 2);
  fs::remove(bad);
}
