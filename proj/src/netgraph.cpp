#include "routecorr/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "routecorr/error.hpp"

namespace routecorr {

Network::Network(std::vector<NodeId> nodes, std::vector<Link> links) : links_(std::move(links)) {
  std::set<NodeId> all(nodes.begin(), nodes.end());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (!(l.impedance > 0.0) || !std::isfinite(l.impedance))
      throw ValidationError("link " + std::to_string(l.id) + ": non-positive impedance");
    if (l.tail == l.head)
      throw ValidationError("link " + std::to_string(l.id) + ": tail equals head");
    if (!index_.emplace(l.id, i).second)
      throw ValidationError("duplicate link id " + std::to_string(l.id));
    all.insert(l.tail);
    all.insert(l.head);
    out_[l.tail].push_back(i);
  }
  nodes_.assign(all.begin(), all.end());
}

bool Network::has_node(NodeId n) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), n);
}

const Link& Network::link(LinkId l) const {
  auto it = index_.find(l);
  if (it == index_.end()) throw ValidationError("unknown link id " + std::to_string(l));
  return links_[it->second];
}

std::span<const std::size_t> Network::outgoing(NodeId n) const {
  auto it = out_.find(n);
  if (it == out_.end()) return {};
  return it->second;
}

Network Network::scaled(double factor) const {
  std::vector<Link> ls = links_;
  for (auto& l : ls) l.impedance *= factor;
  return Network(nodes_, std::move(ls));
}

std::vector<double> ChoiceSet::impedances() const {
  std::vector<double> c;
  c.reserve(routes.size());
  for (const auto& r : routes) c.push_back(r.impedance);
  return c;
}

double ChoiceSet::min_impedance() const {
  if (routes.empty()) throw ValidationError("empty choice set");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : routes) m = std::min(m, r.impedance);
  return m;
}

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

template <class T>
T read_field(std::istringstream& ss, std::size_t lineno, const char* what) {
  T v{};
  if (!(ss >> v)) throw ParseError(lineno, std::string("expected ") + what);
  return v;
}

}  // namespace

NetworkFile load_network(std::istream& in) {
  std::vector<NodeId> nodes;
  std::vector<Link> links;
  std::unordered_set<LinkId> seen;
  std::vector<std::pair<OdPair, std::size_t>> ods;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ss(strip_comment(raw));
    std::string kw;
    if (!(ss >> kw)) continue;
    if (kw == "node") {
      nodes.push_back(read_field<NodeId>(ss, lineno, "node id"));
    } else if (kw == "link") {
      Link l{};
      l.id = read_field<LinkId>(ss, lineno, "link id");
      l.tail = read_field<NodeId>(ss, lineno, "tail node");
      l.head = read_field<NodeId>(ss, lineno, "head node");
      l.impedance = read_field<double>(ss, lineno, "impedance");
      if (!(l.impedance > 0.0) || !std::isfinite(l.impedance))
        throw ParseError(lineno, "non-positive impedance");
      if (l.tail == l.head) throw ParseError(lineno, "tail equals head");
      if (!seen.insert(l.id).second)
        throw ParseError(lineno, "duplicate link id " + std::to_string(l.id));
      links.push_back(l);
    } else if (kw == "od") {
      OdPair od{};
      od.origin = read_field<NodeId>(ss, lineno, "origin");
      od.destination = read_field<NodeId>(ss, lineno, "destination");
      ods.emplace_back(od, lineno);
    } else {
      throw ParseError(lineno, "unknown keyword '" + kw + "'");
    }
    std::string extra;
    if (ss >> extra) throw ParseError(lineno, "trailing token '" + extra + "'");
  }
  NetworkFile f{Network(std::move(nodes), std::move(links)), {}};
  for (const auto& [od, ln] : ods) {
    if (!f.network.has_node(od.origin) || !f.network.has_node(od.destination))
      throw ParseError(ln, "dangling node reference");
    if (od.origin == od.destination) throw ParseError(ln, "origin equals destination");
    f.od_pairs.push_back(od);
  }
  return f;
}

NetworkFile load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open network file " + path);
  return load_network(in);
}

void write_network(std::ostream& out, const Network& net, std::span<const OdPair> ods) {
  out << std::setprecision(17);
  for (NodeId n : net.nodes()) out << "node " << n << '\n';
  for (const Link& l : net.links())
    out << "link " << l.id << ' ' << l.tail << ' ' << l.head << ' ' << l.impedance << '\n';
  for (const OdPair& od : ods) out << "od " << od.origin << ' ' << od.destination << '\n';
}

std::string serialize_network(const Network& net, std::span<const OdPair> ods) {
  std::ostringstream ss;
  write_network(ss, net, ods);
  return ss.str();
}

double route_impedance(const Network& net, std::span<const LinkId> links) {
  double c = 0.0;
  for (LinkId l : links) c += net.impedance(l);
  return c;
}

double overlap_impedance(const Network& net, const Route& a, const Route& b) {
  std::unordered_set<LinkId> in_b(b.links.begin(), b.links.end());
  double c = 0.0;
  for (LinkId l : a.links) {
    double cl = net.impedance(l);
    if (in_b.contains(l)) c += cl;
  }
  for (LinkId l : b.links) (void)net.link(l);
  return c;
}

void validate_od(const Network& net, const OdPair& od) {
  if (!net.has_node(od.origin)) throw ValidationError("origin " + std::to_string(od.origin) + " not in network");
  if (!net.has_node(od.destination))
    throw ValidationError("destination " + std::to_string(od.destination) + " not in network");
  if (od.origin == od.destination) throw ValidationError("origin equals destination");
}

Route make_route(const Network& net, const OdPair& od, std::vector<LinkId> links) {
  if (links.empty()) throw ValidationError("empty route");
  std::unordered_set<NodeId> visited{od.origin};
  NodeId at = od.origin;
  for (LinkId id : links) {
    const Link& l = net.link(id);
    if (l.tail != at) throw ValidationError("route links not connected at link " + std::to_string(id));
    at = l.head;
    if (!visited.insert(at).second) throw ValidationError("route revisits node " + std::to_string(at));
  }
  if (at != od.destination) throw ValidationError("route does not end at the destination");
  Route r{std::move(links), 0.0};
  r.impedance = route_impedance(net, r.links);
  return r;
}

ChoiceSet make_choice_set(const Network& net, const OdPair& od, std::vector<Route> routes) {
  validate_od(net, od);
  ChoiceSet cs{od, {}};
  cs.routes.reserve(routes.size());
  for (auto& r : routes) cs.routes.push_back(make_route(net, od, std::move(r.links)));
  std::sort(cs.routes.begin(), cs.routes.end(),
            [](const Route& a, const Route& b) { return a.links < b.links; });
  for (std::size_t i = 1; i < cs.routes.size(); ++i)
    if (cs.routes[i] == cs.routes[i - 1]) throw ValidationError("duplicate route in choice set");
  return cs;
}

Eigen::MatrixXd overlap_matrix(const Network& net, const ChoiceSet& cs) {
  const auto n = static_cast<Eigen::Index>(cs.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = cs.routes[i].impedance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      m(i, j) = overlap_impedance(net, cs.routes[i], cs.routes[j]);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

void write_choice_set_csv(std::ostream& out, const ChoiceSet& cs) {
  out << "route_index,link_sequence,impedance\n" << std::setprecision(12);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    out << i << ',';
    const auto& ls = cs.routes[i].links;
    for (std::size_t j = 0; j < ls.size(); ++j) out << (j ? ";" : "") << ls[j];
    out << ',' << cs.routes[i].impedance << '\n';
  }
}

}  // namespace routecorr
