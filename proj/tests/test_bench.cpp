#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "routecorr/bench.hpp"
#include "routecorr/error.hpp"
#include "routecorr/gevcov.hpp"
#include "routecorr/routegen.hpp"
#include "support/oracles.hpp"

using namespace routecorr;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("routecorr_bench_" + name);
  std::filesystem::remove_all(p);
  return p;
}

struct Mesh {
  Fixture fx = builtin_network("mesh2x2");
  ChoiceSet cs = enumerate_efficient_routes(fx.network, fx.od);
};

// Correlation MSE pair (fcm, rcm) of a model on the mesh, anchored reference.
std::pair<double, double> mesh_corr_mse(ModelKind m, double dmin) {
  Mesh mesh;
  const auto target_cov = overlap_matrix(mesh.fx.network, mesh.cs);
  const auto target = ds_moments(mesh.fx.network, mesh.cs, 1.0).corr;
  const auto ref = anchored_rcm_reference(target_cov);
  const auto fcm = model_fcm(m, mesh.fx.network, mesh.cs, dmin);
  return {mse_correlations(fcm, target, CorrSpace::Fcm),
          mse_correlations(reduce_to_rcm(fcm, ref), reduce_to_rcm(target_cov, ref), CorrSpace::Rcm)};
}

}  // namespace

TEST(Metrics, ProbabilityExample) {
  std::vector<double> a{0.6, 0.4}, b{0.5, 0.5};
  EXPECT_NEAR(mse_probabilities(a, b), 100.0, 1e-9);
  EXPECT_DOUBLE_EQ(mse_probabilities(b, b), 0.0);
}

TEST(Metrics, CorrelationUsesAllEntries) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2), b = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_NEAR(mse_correlations(a, b, CorrSpace::Fcm), 500.0, 1e-9);
  b(0, 1) = b(1, 0) = 0.5;
  EXPECT_NEAR(mse_correlations(a, a + b, CorrSpace::Rcm), 1e3 * 0.5 / 4.0, 1e-9);
}

TEST(Metrics, LengthMismatchThrows) {
  std::vector<double> a{0.6, 0.4}, b{1.0};
  EXPECT_THROW(mse_probabilities(a, b), ValidationError);
  EXPECT_THROW(mse_correlations(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3), CorrSpace::Fcm),
               ValidationError);
}

TEST(Metrics, StderrMatchesMultinomialDeltaMethod) {
  std::vector<double> p{0.2, 0.3, 0.5}, q{0.25, 0.25, 0.5};
  const double n = 10000.0;
  // var of sum (p-q)^2/K under Cov(q) = (diag q - q q^T)/n
  Eigen::Vector3d g;
  for (int k = 0; k < 3; ++k) g[k] = -2.0 * (p[k] - q[k]) / 3.0 * 1e4;
  Eigen::Matrix3d cov;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) = ((i == j ? q[i] : 0.0) - q[i] * q[j]) / n;
  EXPECT_NEAR(mse_probabilities_stderr(p, q, 10000), std::sqrt(g.dot(cov * g)), 1e-9);
}

TEST(Metrics, MnlFcmAnchorFromOverlaps) {
  Mesh mesh;
  auto paths = oracle::lattice_paths(mesh.fx.network, 2);
  ASSERT_EQ(paths.size(), 6u);
  double ss = 0.0;
  for (const auto& a : paths)
    for (const auto& b : paths) {
      if (&a == &b) continue;
      const double rho = oracle::set_overlap(mesh.fx.network, a.links, b.links) / 4.0;
      ss += rho * rho;
    }
  const double expected = 1e3 * ss / 36.0;
  EXPECT_NEAR(expected, 97.2222, 1e-4);
  EXPECT_NEAR(mesh_corr_mse(ModelKind::Mnl, 0.0).first, expected, 1e-9);
}

TEST(Metrics, MnlRcmAnchor) { EXPECT_NEAR(mesh_corr_mse(ModelKind::Mnl, 0.0).second, 45.44, 0.01); }

// Two-decimal mesh reference values; deterministic columns only.
TEST(MeshAnchors, ConlCorrelations) {
  const std::map<double, std::pair<double, double>> table{
      {0.0, {0.00, 0.00}},   {0.1, {0.01, 0.01}},   {0.2, {0.16, 0.23}},   {0.3, {0.79, 1.05}},
      {0.4, {2.49, 2.96}},   {0.5, {6.08, 6.33}},   {0.6, {12.60, 11.30}}, {0.7, {23.34, 17.87}},
      {0.8, {39.82, 25.86}}, {0.9, {63.79, 35.11}}, {1.0, {97.22, 45.44}}};
  for (const auto& [d, want] : table) {
    auto got = mesh_corr_mse(ModelKind::Conl, d);
    EXPECT_NEAR(got.first, want.first, 0.01) << "dmin " << d;
    EXPECT_NEAR(got.second, want.second, 0.01) << "dmin " << d;
  }
}

TEST(MeshAnchors, LnlConstantCorrelations) {
  const std::map<double, std::pair<double, double>> table{
      {0.1, {1.03, 1.13}},   {0.2, {1.51, 1.67}},   {0.3, {2.57, 2.80}},   {0.4, {4.66, 4.83}},
      {0.5, {8.44, 8.04}},   {0.6, {14.85, 12.63}}, {0.7, {25.15, 18.72}}, {0.8, {40.92, 26.28}},
      {0.9, {64.15, 35.22}}, {1.0, {97.22, 45.44}}};
  for (const auto& [d, want] : table) {
    auto got = mesh_corr_mse(ModelKind::LnlConst, d);
    EXPECT_NEAR(got.first, want.first, 0.015) << "dmin " << d;
    EXPECT_NEAR(got.second, want.second, 0.015) << "dmin " << d;
  }
}

TEST(MeshAnchors, PclAndArithmetic) {
  auto pcl = mesh_corr_mse(ModelKind::Pcl, 0.0);
  EXPECT_NEAR(pcl.first, 60.86, 0.01);
  EXPECT_NEAR(pcl.second, 34.05, 0.01);
  auto ar = mesh_corr_mse(ModelKind::LnlArith, 0.4);
  EXPECT_NEAR(ar.first, 32.24, 0.01);
  EXPECT_NEAR(ar.second, 22.32, 0.01);
}

TEST(Grid, RowCountAndOrder) {
  ExperimentConfig cfg;
  cfg.models = {ModelKind::Mnl, ModelKind::LnlConst, ModelKind::Pcl, ModelKind::Conl};
  cfg.draws = 20000;
  auto rep = run_grid(cfg);
  ASSERT_EQ(rep.rows.size(), 88u);
  EXPECT_EQ(rep.choice_set.size(), 6u);
  EXPECT_EQ(rep.mnp.size(), 2u);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    auto key = [&](const MseRow& r) {
      std::size_t mi = 0;
      while (cfg.models[mi] != r.model) ++mi;
      return std::tuple(mi, r.delta_min, r.cv);
    };
    EXPECT_LT(key(a), key(b));
  }
  EXPECT_EQ(rep.rows.front().variant, "-");
  EXPECT_EQ(rep.rows.back().variant, "w25");
}

TEST(Grid, MnlAndPclRowsIgnoreDeltaMin) {
  ExperimentConfig cfg;
  cfg.models = {ModelKind::Mnl, ModelKind::Pcl};
  cfg.draws = 5000;
  cfg.cv = {0.1};
  auto rep = run_grid(cfg);
  for (const auto& r : rep.rows) {
    const auto& first = r.model == ModelKind::Mnl ? rep.rows.front() : rep.rows[11];
    EXPECT_EQ(r.prob_mse_x1e4, first.prob_mse_x1e4);
    EXPECT_EQ(r.fcm_mse_x1e3, first.fcm_mse_x1e3);
  }
}

TEST(Grid, ValidationErrors) {
  ExperimentConfig cfg;
  cfg.draws = 0;
  EXPECT_THROW(run_grid(cfg), ValidationError);
  cfg = {};
  cfg.delta_min = {1.5};
  EXPECT_THROW(run_grid(cfg), ValidationError);
  cfg = {};
  cfg.cv = {0.0};
  EXPECT_THROW(run_grid(cfg), ValidationError);
  cfg = {};
  cfg.models.clear();
  EXPECT_THROW(run_grid(cfg), ValidationError);
  cfg = {};
  cfg.rcm_reference = 6;
  cfg.draws = 100;
  EXPECT_THROW(run_grid(cfg), ValidationError);
}

TEST(Outputs, ByteIdenticalAcrossRunsAndThreads) {
  ExperimentConfig cfg;
  cfg.draws = 30000;
  cfg.delta_min = {0.0, 0.5, 1.0};
  cfg.threads = 1;
  auto d1 = scratch("a"), d2 = scratch("b");
  auto files = emit_outputs(run_grid(cfg), d1);
  cfg.threads = 4;
  emit_outputs(run_grid(cfg), d2);
  ASSERT_EQ(files.size(), 6u);
  for (const auto& f : files) {
    auto name = f.filename();
    EXPECT_EQ(slurp(d1 / name), slurp(d2 / name)) << name;
  }
  EXPECT_TRUE(std::filesystem::exists(d1 / "curve_prob_cv0.1.csv"));
  EXPECT_TRUE(std::filesystem::exists(d1 / "curve_prob_cv0.2.csv"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST(Outputs, TableHeaderAndCurveColumns) {
  ExperimentConfig cfg;
  cfg.draws = 2000;
  cfg.delta_min = {0.0, 1.0};
  cfg.cv = {0.1};
  auto dir = scratch("c");
  emit_outputs(run_grid(cfg), dir);
  auto table = slurp(dir / "table.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "model,variant,dmin,cv,prob_mse_x1e4,fcm_mse_x1e3,rcm_mse_x1e3");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 1 + 6 * 2);
  auto curve = slurp(dir / "curve_fcm.csv");
  EXPECT_EQ(curve.substr(0, curve.find('\n')),
            "dmin,mnl,lnl-const:constant,lnl-arith:arithmetic,lnl-geom:geometric,pcl,conl:w25");
  std::filesystem::remove_all(dir);
}

TEST(Parsing, Grid) {
  auto g = parse_grid("0:1:0.1");
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g[3], 0.3);
  EXPECT_EQ(g[10], 1.0);
  EXPECT_EQ(parse_grid("0.1,0.2"), (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(parse_grid("0.5"), (std::vector<double>{0.5}));
  EXPECT_THROW(parse_grid("1:0:0.1"), ValidationError);
  EXPECT_THROW(parse_grid("0:1:0"), ValidationError);
  EXPECT_THROW(parse_grid("0:1"), ValidationError);
  EXPECT_THROW(parse_grid("a,b"), ValidationError);
  EXPECT_THROW(parse_grid(""), ValidationError);
}

TEST(Parsing, OdAndModels) {
  EXPECT_EQ(parse_od("1-9"), (OdPair{1, 9}));
  EXPECT_THROW(parse_od("1_9"), ValidationError);
  EXPECT_THROW(parse_od("1-x"), ValidationError);
  auto ms = parse_model_list("mnl,conl,lnl-geom");
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[1], ModelKind::Conl);
  for (auto m : {ModelKind::Mnl, ModelKind::LnlConst, ModelKind::LnlArith, ModelKind::LnlGeom, ModelKind::Pcl,
                 ModelKind::Conl})
    EXPECT_EQ(parse_model(model_name(m)), m);
  EXPECT_THROW(parse_model("probit"), ValidationError);
}

TEST(Parsing, ResolveNetwork) {
  auto fx = resolve_network("fourlink:c=12,h=2");
  EXPECT_DOUBLE_EQ(fx.network.impedance(1), 12.0);
  EXPECT_DOUBLE_EQ(fx.network.impedance(2), 10.0);
  EXPECT_EQ(fx.od, (OdPair{1, 3}));
  EXPECT_EQ(resolve_network("mesh2x2", OdPair{1, 5}).od, (OdPair{1, 5}));
  EXPECT_THROW(resolve_network("fourlink:q=1"), ValidationError);
  EXPECT_THROW(resolve_network("fourlink:c"), ValidationError);
  EXPECT_THROW(resolve_network("mesh2x2", OdPair{1, 99}), ValidationError);
  EXPECT_THROW(resolve_network("/nonexistent/file.net"), Error);

  auto path = std::filesystem::temp_directory_path() / "routecorr_bench_net.net";
  {
    std::ofstream f(path);
    f << serialize_network(builtin_network("braess").network, std::vector<OdPair>{{1, 4}});
  }
  auto from_file = resolve_network(path.string());
  EXPECT_EQ(from_file.network, builtin_network("braess").network);
  EXPECT_EQ(from_file.od, (OdPair{1, 4}));
  std::filesystem::remove(path);
}
