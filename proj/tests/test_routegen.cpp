#include <gtest/gtest.h>

#include <limits>
#include <set>

#include "routecorr/error.hpp"
#include "routecorr/routegen.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace routecorr;

TEST(MinCosts, SingleLink) {
  Network net({}, {{1, 1, 2, 3.0}});
  auto d = min_costs_from(net, 1);
  EXPECT_EQ(d.at(1), 0.0);
  EXPECT_EQ(d.at(2), 3.0);
  EXPECT_THROW(min_costs_from(net, 5), ValidationError);
}

TEST(MinCosts, UnreachableIsInfinite) {
  Network net({}, {{1, 1, 2, 3.0}, {2, 3, 2, 1.0}});
  auto d = min_costs_from(net, 1);
  EXPECT_EQ(d.at(3), std::numeric_limits<double>::infinity());
}

TEST(MinCosts, MeshCorner) {
  auto fx = builtin_network("mesh2x2");
  EXPECT_EQ(min_costs_from(fx.network, 1).at(9), 4.0);
}

TEST(MinCosts, SiouxFallsMatchesLabelCorrecting) {
  auto fx = builtin_network("sioux_falls");
  for (NodeId o : {1, 7, 15, 24}) {
    auto d = min_costs_from(fx.network, o);
    auto bf = oracle::bellman_ford(fx.network, o);
    for (const auto& [n, c] : bf) EXPECT_DOUBLE_EQ(d.at(n), c) << "origin " << o << " node " << n;
  }
}

TEST(MinCosts, RandomNetworksMatchLabelCorrecting) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = gen::layered(seed, 4, 4);
    auto d = min_costs_from(inst.net, inst.od.origin);
    for (const auto& [n, c] : oracle::bellman_ford(inst.net, inst.od.origin)) EXPECT_NEAR(d.at(n), c, 1e-12);
  }
}

TEST(Efficient, MeshHasSixRoutesMatchingLattice) {
  auto fx = builtin_network("mesh2x2");
  auto cs = enumerate_efficient_routes(fx.network, fx.od);
  ASSERT_EQ(cs.size(), 6u);
  std::set<std::vector<LinkId>> expected, got;
  for (const auto& p : oracle::lattice_paths(fx.network, 2)) expected.insert(p.links);
  for (const auto& r : cs.routes) got.insert(r.links);
  EXPECT_EQ(got, expected);
}

TEST(Efficient, MeshBypassHasEighteenRoutes) {
  auto fx = builtin_network("mesh_bypass");
  EXPECT_EQ(enumerate_efficient_routes(fx.network, fx.od).size(), 18u);
}

TEST(Efficient, SiouxFallsCount) {
  // The shipped free-flow file yields 17 origin-efficient routes for 1-15.
  auto fx = builtin_network("sioux_falls");
  EXPECT_EQ(enumerate_efficient_routes(fx.network, fx.od).size(), 17u);
}

TEST(Efficient, StrictInequalityExcludesTies) {
  // 1->2 (1), 1->3 (1), 2->3 (1e-9 would be efficient; 0-length impossible), equal labels at 2 and 3
  Network net({}, {{1, 1, 2, 1.0}, {2, 1, 3, 1.0}, {3, 2, 3, 0.5}, {4, 3, 2, 0.5}, {5, 2, 4, 1.0}, {6, 3, 4, 1.0}});
  auto g = efficient_subgraph(net, 1);
  EXPECT_EQ(g.links, (std::vector<LinkId>{1, 2, 5, 6}));
  EXPECT_EQ(enumerate_efficient_routes(net, {1, 4}).size(), 2u);
}

TEST(Efficient, UnreachableDestination) {
  Network net({}, {{1, 1, 2, 1.0}, {2, 3, 2, 1.0}});
  EXPECT_THROW(enumerate_efficient_routes(net, {1, 3}), ValidationError);
  EXPECT_THROW(enumerate_efficient_routes(net, {1, 1}), ValidationError);
  EXPECT_THROW(enumerate_efficient_routes(net, {1, 9}), ValidationError);
}

TEST(Efficient, PropertiesOnRandomNetworks) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = gen::layered(seed, 3 + seed % 3, 3);
    auto cs = enumerate_efficient_routes(inst.net, inst.od);
    ASSERT_GE(cs.size(), 1u);
    auto g = efficient_subgraph(inst.net, inst.od.origin);
    std::set<LinkId> eff(g.links.begin(), g.links.end());
    const double best = oracle::bellman_ford(inst.net, inst.od.origin).at(inst.od.destination);
    bool attained = false;
    for (const auto& r : cs.routes) {
      std::set<NodeId> seen{inst.od.origin};
      for (LinkId l : r.links) {
        EXPECT_TRUE(eff.count(l));
        EXPECT_TRUE(seen.insert(inst.net.link(l).head).second);
        EXPECT_LT(g.label.at(inst.net.link(l).tail), g.label.at(inst.net.link(l).head));
      }
      EXPECT_GE(r.impedance, best - 1e-12);
      attained = attained || std::abs(r.impedance - best) < 1e-12;
    }
    EXPECT_TRUE(attained);
    // independent of link insertion order
    auto cs2 = enumerate_efficient_routes(gen::shuffled(inst.net, seed * 7), inst.od);
    ASSERT_EQ(cs2.size(), cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) EXPECT_EQ(cs2.routes[i].links, cs.routes[i].links);
  }
}

TEST(Sample, ZeroVarianceGivesShortestRoute) {
  auto fx = builtin_network("braess", {{"h", 0.5}});
  auto cs = sample_choice_set(fx.network, fx.od, 50, 0.0, 3);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_DOUBLE_EQ(cs.routes[0].impedance, 9.0);
  Network net({}, {{1, 1, 2, 1.0}, {2, 1, 2, 2.0}});
  auto one = sample_choice_set(net, {1, 2}, 100, 0.0, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.routes[0].links, (std::vector<LinkId>{1}));
}

TEST(Sample, MeshCoversEfficientSet) {
  auto fx = builtin_network("mesh2x2");
  auto sampled = sample_choice_set(fx.network, fx.od, 10000, 0.2, 11);
  auto eff = enumerate_efficient_routes(fx.network, fx.od);
  std::set<std::vector<LinkId>> s;
  for (const auto& r : sampled.routes) s.insert(r.links);
  for (const auto& r : eff.routes) EXPECT_TRUE(s.count(r.links));
}

TEST(Sample, DeterministicForSeed) {
  auto fx = builtin_network("sioux_falls");
  auto a = sample_choice_set(fx.network, fx.od, 500, 0.3, 5);
  auto b = sample_choice_set(fx.network, fx.od, 500, 0.3, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.routes[i].links, b.routes[i].links);
  EXPECT_THROW(sample_choice_set(fx.network, fx.od, 0, 0.3, 5), ValidationError);
  EXPECT_THROW(sample_choice_set(fx.network, fx.od, 10, -0.1, 5), ValidationError);
}
