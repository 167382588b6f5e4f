#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "routecorr/gev.hpp"
#include "routecorr/netgraph.hpp"

namespace routecorr {

struct SharedLink {
  LinkId link;
  double impedance;
  std::vector<std::size_t> routes;
};

/// Links used by two or more routes, by descending impedance then ascending id.
std::vector<SharedLink> shared_links(const Network& net, const ChoiceSet& cs);

struct ConlNest {
  std::optional<LinkId> link;  // empty for a singleton
  std::vector<std::size_t> routes;
};

/// One nested-logit kernel: a partition of the routes into link nests and singletons.
struct MixingComponent {
  std::vector<ConlNest> nests;

  /// Link ids of the link-labelled nests, in nest order.
  std::vector<LinkId> link_nests() const;
  bool is_nested() const { return !link_nests().empty(); }
};

/// Greedy colouring of the shared-link conflict graph, then densification of
/// each component with every further non-conflicting shared link.
std::vector<MixingComponent> build_mixing_structure(const Network& net, const ChoiceSet& cs);

/// Throws ValidationError if a component is not a partition of the routes,
/// a link nest is malformed, or a shared link is never nested.
void validate_structure(std::span<const MixingComponent> comps, std::span<const SharedLink> shared,
                        std::size_t n_routes);

enum class WeightFormula { Mean = 24, MeanSplit = 25, MinSplit = 26, MaxSplit = 27 };

WeightFormula weight_formula_from_int(int code);

std::vector<double> component_weights(std::span<const MixingComponent> comps, std::span<const SharedLink> shared,
                                      WeightFormula formula, double gamma = 1.0);

/// Per shared link (aligned with `shared`):
///   t = 1 - c_l / (C_min sum_{i in I^l} w_i),  delta = max(delta_min, sqrt t) or delta_min if t <= 0,
/// then floored at the positivity floor.
std::vector<double> nesting_deltas(std::span<const MixingComponent> comps, std::span<const SharedLink> shared,
                                   std::span<const double> weights, double c_min, double delta_min);

struct ConlStructure {
  std::size_t n_routes = 0;
  double theta0 = 1.0;
  double c_min = 0.0;
  double delta_min = 0.0;
  std::vector<SharedLink> shared;
  std::vector<MixingComponent> components;
  std::vector<double> weights;
  std::vector<double> deltas;  // aligned with shared
  std::vector<std::vector<LinkId>> route_links;

  double delta_of(LinkId l) const;
  /// sum of w_i over components that nest link l.
  double nest_weight(LinkId l) const;
  /// Component i as a nest list usable by the generic GEV routines.
  std::vector<Nest> component_nests(std::size_t i) const;
};

ConlStructure build_conl(const Network& net, const ChoiceSet& cs, WeightFormula formula, double delta_min,
                         double theta0, double gamma = 1.0);

std::vector<double> conl_probabilities(const ConlStructure& s, std::span<const double> impedances);

struct ConlCorrelation {
  Eigen::MatrixXd corr;
  std::vector<double> residuals;  // aligned with shared
  std::vector<bool> clamped;      // delta set by a floor rather than by sqrt(t)
};

/// rho_kk' = sum_{l in L_k and L_k'} (1 - delta_l^2) sum_{i in I^l} w_i.
ConlCorrelation conl_fcm(const ConlStructure& s);

}  // namespace routecorr
