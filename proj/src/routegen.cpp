#include "routecorr/routegen.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <set>

#include "routecorr/error.hpp"
#include "routecorr/random.hpp"

namespace routecorr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tree {
  std::unordered_map<NodeId, double> dist;
  std::unordered_map<NodeId, std::size_t> pred;  // position into net.links()
};

template <class Cost>
Tree dijkstra(const Network& net, NodeId origin, Cost cost) {
  Tree t;
  for (NodeId n : net.nodes()) t.dist[n] = kInf;
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  t.dist[origin] = 0.0;
  pq.emplace(0.0, origin);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > t.dist[u]) continue;
    for (std::size_t pos : net.outgoing(u)) {
      const Link& l = net.links()[pos];
      double nd = d + cost(pos);
      if (nd < t.dist[l.head]) {
        t.dist[l.head] = nd;
        t.pred[l.head] = pos;
        pq.emplace(nd, l.head);
      }
    }
  }
  return t;
}

}  // namespace

std::unordered_map<NodeId, double> min_costs_from(const Network& net, NodeId origin) {
  if (!net.has_node(origin)) throw ValidationError("origin " + std::to_string(origin) + " not in network");
  return dijkstra(net, origin, [&](std::size_t pos) { return net.links()[pos].impedance; }).dist;
}

EfficientSubgraph efficient_subgraph(const Network& net, NodeId origin) {
  EfficientSubgraph g{origin, min_costs_from(net, origin), {}};
  for (const Link& l : net.links()) {
    double ci = g.label.at(l.tail), cj = g.label.at(l.head);
    if (ci < kInf && ci < cj) g.links.push_back(l.id);
  }
  std::sort(g.links.begin(), g.links.end());
  return g;
}

ChoiceSet enumerate_efficient_routes(const Network& net, const OdPair& od) {
  validate_od(net, od);
  const EfficientSubgraph g = efficient_subgraph(net, od.origin);
  if (!(g.label.at(od.destination) < kInf))
    throw ValidationError("destination " + std::to_string(od.destination) + " unreachable");

  std::unordered_map<NodeId, std::vector<LinkId>> out;
  for (LinkId id : g.links) out[net.link(id).tail].push_back(id);

  // Labels strictly increase along efficient links, so plain DFS never cycles.
  std::vector<Route> routes;
  std::vector<LinkId> path;
  std::function<void(NodeId)> dfs = [&](NodeId u) {
    if (u == od.destination) {
      routes.push_back({path, 0.0});
      return;
    }
    auto it = out.find(u);
    if (it == out.end()) return;
    for (LinkId id : it->second) {
      path.push_back(id);
      dfs(net.link(id).head);
      path.pop_back();
    }
  };
  dfs(od.origin);
  return make_choice_set(net, od, std::move(routes));
}

ChoiceSet sample_choice_set(const Network& net, const OdPair& od, std::uint64_t n_draws, double cv,
                            std::uint64_t seed) {
  validate_od(net, od);
  if (n_draws < 1) throw ValidationError("n_draws must be at least 1");
  if (!(cv >= 0.0)) throw ValidationError("cv must be non-negative");
  const auto& links = net.links();
  std::vector<double> cost(links.size());
  std::set<std::vector<LinkId>> found;
  for (std::uint64_t draw = 0; draw < n_draws; ++draw) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      const double c = links[i].impedance;
      const double z = cv > 0.0 ? rng::normal(seed, rng::kStreamChoiceSet, draw, i) : 0.0;
      cost[i] = std::max(c * (1.0 + cv * z), 1e-9 * c);
    }
    Tree t = dijkstra(net, od.origin, [&](std::size_t pos) { return cost[pos]; });
    if (!(t.dist.at(od.destination) < kInf))
      throw ValidationError("destination " + std::to_string(od.destination) + " unreachable");
    std::vector<LinkId> path;
    for (NodeId at = od.destination; at != od.origin;) {
      const Link& l = links[t.pred.at(at)];
      path.push_back(l.id);
      at = l.tail;
    }
    std::reverse(path.begin(), path.end());
    found.insert(std::move(path));
  }
  std::vector<Route> routes;
  for (const auto& p : found) routes.push_back({p, 0.0});
  return make_choice_set(net, od, std::move(routes));
}

}  // namespace routecorr
