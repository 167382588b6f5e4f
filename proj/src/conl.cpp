#include "routecorr/conl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "routecorr/error.hpp"

namespace routecorr {

namespace {

bool conflicts(const SharedLink& a, const SharedLink& b) {
  for (std::size_t k : a.routes)
    if (std::binary_search(b.routes.begin(), b.routes.end(), k)) return true;
  return false;
}

const SharedLink& find_shared(std::span<const SharedLink> shared, LinkId l) {
  for (const auto& s : shared)
    if (s.link == l) return s;
  throw ValidationError("link " + std::to_string(l) + " is not shared");
}

}  // namespace

std::vector<LinkId> MixingComponent::link_nests() const {
  std::vector<LinkId> out;
  for (const auto& n : nests)
    if (n.link) out.push_back(*n.link);
  return out;
}

std::vector<SharedLink> shared_links(const Network& net, const ChoiceSet& cs) {
  if (cs.size() == 0) throw ValidationError("empty choice set");
  std::map<LinkId, std::vector<std::size_t>> members;
  for (std::size_t k = 0; k < cs.size(); ++k)
    for (LinkId l : cs.routes[k].links) members[l].push_back(k);
  std::vector<SharedLink> out;
  for (auto& [l, rs] : members)
    if (rs.size() >= 2) out.push_back({l, net.impedance(l), std::move(rs)});
  std::stable_sort(out.begin(), out.end(), [](const SharedLink& a, const SharedLink& b) {
    if (a.impedance != b.impedance) return a.impedance > b.impedance;
    return a.link < b.link;
  });
  return out;
}

std::vector<MixingComponent> build_mixing_structure(const Network& net, const ChoiceSet& cs) {
  const auto shared = shared_links(net, cs);
  const std::size_t n = cs.size();

  std::vector<std::vector<std::size_t>> classes;  // positions into shared
  for (std::size_t s = 0; s < shared.size(); ++s) {
    auto fits = [&](const std::vector<std::size_t>& cls) {
      return std::none_of(cls.begin(), cls.end(), [&](std::size_t o) { return conflicts(shared[s], shared[o]); });
    };
    auto it = std::find_if(classes.begin(), classes.end(), fits);
    if (it == classes.end())
      classes.push_back({s});
    else
      it->push_back(s);
  }
  for (auto& cls : classes)
    for (std::size_t s = 0; s < shared.size(); ++s) {
      if (std::find(cls.begin(), cls.end(), s) != cls.end()) continue;
      if (std::none_of(cls.begin(), cls.end(), [&](std::size_t o) { return conflicts(shared[s], shared[o]); }))
        cls.push_back(s);
    }
  if (classes.empty()) classes.emplace_back();

  std::vector<MixingComponent> comps;
  for (const auto& cls : classes) {
    MixingComponent c;
    std::vector<bool> covered(n, false);
    for (std::size_t s : cls) {
      c.nests.push_back({shared[s].link, shared[s].routes});
      for (std::size_t k : shared[s].routes) covered[k] = true;
    }
    for (std::size_t k = 0; k < n; ++k)
      if (!covered[k]) c.nests.push_back({std::nullopt, {k}});
    comps.push_back(std::move(c));
  }
  return comps;
}

void validate_structure(std::span<const MixingComponent> comps, std::span<const SharedLink> shared,
                        std::size_t n_routes) {
  if (comps.empty()) throw ValidationError("structure has no components");
  std::vector<bool> nested(shared.size(), false);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    std::vector<int> seen(n_routes, 0);
    for (const auto& nest : comps[i].nests) {
      if (nest.routes.empty()) throw ValidationError("empty nest in component " + std::to_string(i));
      for (std::size_t k : nest.routes) {
        if (k >= n_routes) throw ValidationError("nest references an unknown route");
        ++seen[k];
      }
      if (nest.link) {
        const SharedLink& sl = find_shared(shared, *nest.link);
        if (nest.routes != sl.routes)
          throw ValidationError("nest of link " + std::to_string(*nest.link) + " does not hold exactly its routes");
        nested[static_cast<std::size_t>(&sl - shared.data())] = true;
      } else if (nest.routes.size() != 1) {
        throw ValidationError("unlabelled nest with more than one route");
      }
    }
    for (std::size_t k = 0; k < n_routes; ++k) {
      if (seen[k] == 0) throw ValidationError("component " + std::to_string(i) + " misses route " + std::to_string(k));
      if (seen[k] > 1)
        throw ValidationError("route " + std::to_string(k) + " in two nests of component " + std::to_string(i));
    }
  }
  for (std::size_t s = 0; s < shared.size(); ++s)
    if (!nested[s]) throw ValidationError("shared link " + std::to_string(shared[s].link) + " never nested");
}

WeightFormula weight_formula_from_int(int code) {
  switch (code) {
    case 24: return WeightFormula::Mean;
    case 25: return WeightFormula::MeanSplit;
    case 26: return WeightFormula::MinSplit;
    case 27: return WeightFormula::MaxSplit;
    default: throw ValidationError("weight formula must be one of 24, 25, 26, 27");
  }
}

std::vector<double> component_weights(std::span<const MixingComponent> comps, std::span<const SharedLink> shared,
                                      WeightFormula formula, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  std::map<LinkId, int> occurrences;
  for (const auto& c : comps)
    for (LinkId l : c.link_nests()) ++occurrences[l];

  std::vector<double> w(comps.size(), 0.0);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto ls = comps[i].link_nests();
    if (ls.empty()) continue;
    std::vector<double> v;
    for (LinkId l : ls) {
      const double c = find_shared(shared, l).impedance;
      v.push_back(formula == WeightFormula::Mean ? c : c / occurrences[l]);
    }
    double f = 0.0;
    switch (formula) {
      case WeightFormula::Mean:
      case WeightFormula::MeanSplit: f = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); break;
      case WeightFormula::MinSplit: f = *std::min_element(v.begin(), v.end()); break;
      case WeightFormula::MaxSplit: f = *std::max_element(v.begin(), v.end()); break;
    }
    w[i] = std::pow(f, gamma);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("no nested component to weight");
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> nesting_deltas(std::span<const MixingComponent> comps, std::span<const SharedLink> shared,
                                   std::span<const double> weights, double c_min, double delta_min) {
  if (weights.size() != comps.size()) throw ValidationError("one weight per component required");
  if (!(c_min > 0.0)) throw ValidationError("C_min must be positive");
  if (!(delta_min >= 0.0 && delta_min <= 1.0)) throw ValidationError("delta_min outside [0, 1]");
  std::vector<double> d;
  for (const auto& s : shared) {
    double wsum = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const auto ls = comps[i].link_nests();
      if (std::find(ls.begin(), ls.end(), s.link) != ls.end()) wsum += weights[i];
    }
    if (!(wsum > 0.0)) throw ValidationError("shared link " + std::to_string(s.link) + " carries no weight");
    const double t = 1.0 - s.impedance / (c_min * wsum);
    const double v = t > 0.0 ? std::max(delta_min, std::sqrt(t)) : delta_min;
    d.push_back(std::min(1.0, std::max(v, kDeltaFloor)));
  }
  return d;
}

double ConlStructure::delta_of(LinkId l) const {
  for (std::size_t s = 0; s < shared.size(); ++s)
    if (shared[s].link == l) return deltas[s];
  throw ValidationError("link " + std::to_string(l) + " is not shared");
}

double ConlStructure::nest_weight(LinkId l) const {
  double w = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto ls = components[i].link_nests();
    if (std::find(ls.begin(), ls.end(), l) != ls.end()) w += weights[i];
  }
  return w;
}

std::vector<Nest> ConlStructure::component_nests(std::size_t i) const {
  std::vector<Nest> out;
  for (const auto& n : components.at(i).nests) {
    Nest g{n.routes, std::vector<double>(n.routes.size(), 1.0), 1.0, n.link};
    if (n.link) g.delta = delta_of(*n.link);
    out.push_back(std::move(g));
  }
  return out;
}

ConlStructure build_conl(const Network& net, const ChoiceSet& cs, WeightFormula formula, double delta_min,
                         double theta0, double gamma) {
  if (!(theta0 > 0.0)) throw ValidationError("theta0 must be positive");
  ConlStructure s;
  s.n_routes = cs.size();
  s.theta0 = theta0;
  s.c_min = cs.min_impedance();
  s.delta_min = delta_min;
  s.shared = shared_links(net, cs);
  s.components = build_mixing_structure(net, cs);
  validate_structure(s.components, s.shared, s.n_routes);
  for (const auto& r : cs.routes) s.route_links.push_back(r.links);
  if (s.shared.empty()) {
    // nothing to nest: a single all-singleton component, i.e. plain logit
    s.weights = {1.0};
  } else {
    s.weights = component_weights(s.components, s.shared, formula, gamma);
  }
  s.deltas = nesting_deltas(s.components, s.shared, s.weights, s.c_min, delta_min);
  return s;
}

std::vector<double> conl_probabilities(const ConlStructure& s, std::span<const double> impedances) {
  if (impedances.size() != s.n_routes) throw ValidationError("impedance vector has the wrong length");
  std::vector<double> p(s.n_routes, 0.0);
  for (std::size_t i = 0; i < s.components.size(); ++i) {
    if (s.weights[i] == 0.0) continue;
    const auto nests = s.component_nests(i);
    const auto pi = nested_probabilities(nests, impedances, s.theta0);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += s.weights[i] * pi[k];
  }
  return p;
}

ConlCorrelation conl_fcm(const ConlStructure& s) {
  const auto n = static_cast<Eigen::Index>(s.n_routes);
  ConlCorrelation out;
  out.corr = Eigen::MatrixXd::Identity(n, n);
  std::map<LinkId, double> contrib;
  for (std::size_t j = 0; j < s.shared.size(); ++j) {
    const auto& sl = s.shared[j];
    const double w = s.nest_weight(sl.link);
    const double d = s.deltas[j];
    contrib[sl.link] = (1.0 - d * d) * w;
    out.residuals.push_back(contrib[sl.link] - sl.impedance / s.c_min);
    const double t = 1.0 - sl.impedance / (s.c_min * w);
    out.clamped.push_back(!(t > 0.0) || std::sqrt(t) < std::max(s.delta_min, kDeltaFloor));
  }
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b) {
      double rho = 0.0;
      for (LinkId l : s.route_links[static_cast<std::size_t>(a)]) {
        const auto& other = s.route_links[static_cast<std::size_t>(b)];
        auto it = contrib.find(l);
        if (it != contrib.end() && std::find(other.begin(), other.end(), l) != other.end()) rho += it->second;
      }
      out.corr(a, b) = out.corr(b, a) = rho;
    }
  return out;
}

}  // namespace routecorr
