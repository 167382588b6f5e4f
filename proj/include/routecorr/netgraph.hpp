#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace routecorr {

using NodeId = std::int64_t;
using LinkId = std::int64_t;

struct Link {
  LinkId id;
  NodeId tail;
  NodeId head;
  double impedance;

  bool operator==(const Link&) const = default;
};

struct OdPair {
  NodeId origin;
  NodeId destination;

  bool operator==(const OdPair&) const = default;
};

/// Directed graph with strictly positive additive link impedances.
/// Immutable once constructed.
class Network {
 public:
  Network() = default;
  /// Nodes referenced by links are added implicitly.
  Network(std::vector<NodeId> nodes, std::vector<Link> links);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }

  bool has_node(NodeId n) const;
  bool has_link(LinkId l) const { return index_.contains(l); }
  /// Throws ValidationError for an unknown id.
  const Link& link(LinkId l) const;
  double impedance(LinkId l) const { return link(l).impedance; }
  /// Positions into links() of the links leaving n.
  std::span<const std::size_t> outgoing(NodeId n) const;

  /// Copy with every impedance multiplied by factor.
  Network scaled(double factor) const;

  bool operator==(const Network& o) const { return nodes_ == o.nodes_ && links_ == o.links_; }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Link> links_;
  std::unordered_map<LinkId, std::size_t> index_;
  std::unordered_map<NodeId, std::vector<std::size_t>> out_;
};

struct Route {
  std::vector<LinkId> links;
  double impedance = 0.0;

  bool operator==(const Route& o) const { return links == o.links; }
};

/// Routes for one od pair, sorted lexicographically by link-id sequence.
struct ChoiceSet {
  OdPair od{};
  std::vector<Route> routes;

  std::size_t size() const { return routes.size(); }
  std::vector<double> impedances() const;
  double min_impedance() const;
};

/// Network plus its study od pair.
struct Fixture {
  Network network;
  OdPair od;
};

struct NetworkFile {
  Network network;
  std::vector<OdPair> od_pairs;
};

NetworkFile load_network(std::istream& in);
NetworkFile load_network_file(const std::string& path);
void write_network(std::ostream& out, const Network& net, std::span<const OdPair> ods = {});
std::string serialize_network(const Network& net, std::span<const OdPair> ods = {});

using Params = std::map<std::string, double, std::less<>>;

/// fourlink(c,h), braess(a,b,h), mesh2x2(c), mesh_bypass, sioux_falls.
Fixture builtin_network(std::string_view name, const Params& params = {});
std::vector<std::string> builtin_names();
/// Raw text of the bundled Sioux Falls file.
std::string_view sioux_falls_text();

double route_impedance(const Network& net, std::span<const LinkId> links);
double overlap_impedance(const Network& net, const Route& a, const Route& b);

/// Checks connectivity from od.origin to od.destination and acyclicity.
Route make_route(const Network& net, const OdPair& od, std::vector<LinkId> links);
/// Sorts canonically; rejects duplicates and routes of another od pair.
ChoiceSet make_choice_set(const Network& net, const OdPair& od, std::vector<Route> routes);
void validate_od(const Network& net, const OdPair& od);

/// Matrix of overlap impedances; diagonal holds C_k.
Eigen::MatrixXd overlap_matrix(const Network& net, const ChoiceSet& cs);

void write_choice_set_csv(std::ostream& out, const ChoiceSet& cs);

}  // namespace routecorr
