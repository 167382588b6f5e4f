#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "routecorr/netgraph.hpp"

namespace routecorr {

/// Links (i,j) with C_oi < C_oj under origin labels.
struct EfficientSubgraph {
  NodeId origin{};
  std::unordered_map<NodeId, double> label;
  std::vector<LinkId> links;
};

/// Single-source shortest-path costs; unreachable nodes map to +inf.
std::unordered_map<NodeId, double> min_costs_from(const Network& net, NodeId origin);

EfficientSubgraph efficient_subgraph(const Network& net, NodeId origin);

/// All routes from o to d made only of efficient links, canonically ordered.
ChoiceSet enumerate_efficient_routes(const Network& net, const OdPair& od);

/// Union of shortest routes over n_draws perturbed impedance vectors,
/// c'_l ~ Normal(c_l, (cv c_l)^2) clamped at 1e-9 c_l.
ChoiceSet sample_choice_set(const Network& net, const OdPair& od, std::uint64_t n_draws, double cv,
                            std::uint64_t seed);

}  // namespace routecorr
