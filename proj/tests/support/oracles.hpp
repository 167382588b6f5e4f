#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "routecorr/netgraph.hpp"

namespace oracle {

using routecorr::LinkId;
using routecorr::Network;
using routecorr::NodeId;

inline LinkId link_between(const Network& net, NodeId tail, NodeId head) {
  for (const auto& l : net.links())
    if (l.tail == tail && l.head == head) return l.id;
  return -1;
}

/// Corner-to-corner lattice paths of a (n+1)x(n+1) grid, as move strings and link lists.
struct LatticePath {
  std::string moves;
  std::vector<LinkId> links;
};

inline std::vector<LatticePath> lattice_paths(const Network& net, int n) {
  std::string moves(static_cast<std::size_t>(n), 'R');
  moves += std::string(static_cast<std::size_t>(n), 'U');
  std::sort(moves.begin(), moves.end());
  std::vector<LatticePath> out;
  do {
    int r = 0, c = 0;
    LatticePath p{moves, {}};
    for (char m : moves) {
      NodeId from = r * (n + 1) + c + 1;
      (m == 'R' ? c : r) += 1;
      NodeId to = r * (n + 1) + c + 1;
      p.links.push_back(link_between(net, from, to));
    }
    out.push_back(p);
  } while (std::next_permutation(moves.begin(), moves.end()));
  return out;
}

/// Label-correcting shortest paths (Bellman-Ford).
inline std::map<NodeId, double> bellman_ford(const Network& net, NodeId origin) {
  std::map<NodeId, double> d;
  for (NodeId n : net.nodes()) d[n] = std::numeric_limits<double>::infinity();
  d[origin] = 0.0;
  for (std::size_t it = 0; it < net.nodes().size(); ++it) {
    bool changed = false;
    for (const auto& l : net.links())
      if (d[l.tail] + l.impedance < d[l.head]) {
        d[l.head] = d[l.tail] + l.impedance;
        changed = true;
      }
    if (!changed) break;
  }
  return d;
}

inline double set_overlap(const Network& net, const std::vector<LinkId>& a, const std::vector<LinkId>& b) {
  std::set<LinkId> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  double c = 0.0;
  for (LinkId l : sa)
    if (sb.count(l)) c += net.impedance(l);
  return c;
}

/// Two-level nested logit with disjoint nests (each route in exactly one nest).
inline std::vector<double> nested_logit(const std::vector<double>& cost, const std::vector<std::vector<int>>& nests,
                                        const std::vector<double>& delta, double theta0) {
  std::vector<double> p(cost.size(), 0.0);
  std::vector<double> inclusive(nests.size());
  double denom = 0.0;
  for (std::size_t m = 0; m < nests.size(); ++m) {
    double s = 0.0;
    for (int k : nests[m]) s += std::exp(-cost[k] / (theta0 * delta[m]));
    inclusive[m] = s;
    denom += std::pow(s, delta[m]);
  }
  for (std::size_t m = 0; m < nests.size(); ++m)
    for (int k : nests[m])
      p[k] = std::exp(-cost[k] / (theta0 * delta[m])) / inclusive[m] * std::pow(inclusive[m], delta[m]) / denom;
  return p;
}

inline double nl_covariance(double delta, double theta0) {
  return std::numbers::pi * std::numbers::pi * theta0 * theta0 * (1.0 - delta * delta) / 6.0;
}

}  // namespace oracle
