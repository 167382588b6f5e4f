#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "routecorr/netgraph.hpp"

namespace routecorr {

/// Positivity floor applied to every nesting parameter.
inline constexpr double kDeltaFloor = 1e-3;

/// One nest of a cross-nested generating function
///   G(y) = sum_l ( sum_{k in l} (alpha_kl y_k)^(1/delta_l) )^delta_l.
struct Nest {
  std::vector<std::size_t> routes;
  std::vector<double> alpha;  // parallel to routes
  double delta = 1.0;
  std::optional<LinkId> link;
};

struct MnlStructure {};
struct CnlStructure {
  std::vector<Nest> nests;
};
/// Off-diagonal similarities; one nest per route pair with delta = 1 - sigma.
struct PclStructure {
  Eigen::MatrixXd sigma;
};

struct GevModel {
  std::size_t n_routes = 0;
  double theta0 = 1.0;
  std::variant<MnlStructure, CnlStructure, PclStructure> structure;
};

enum class DeltaRuleKind { Constant, Arithmetic, Geometric };

struct DeltaRule {
  DeltaRuleKind kind = DeltaRuleKind::Constant;
  double delta_min = 0.0;
};

/// theta0 = sqrt(6) cv C_min / pi.
double theta0_from_cv(double cv, double c_min);

GevModel make_mnl(std::size_t n_routes, double theta0);
GevModel make_cnl(std::vector<Nest> nests, std::size_t n_routes, double theta0);
GevModel make_pcl(Eigen::MatrixXd sigma, double theta0);
/// Throws ModelError when an invariant does not hold.
void validate(const GevModel& m);

/// The model written as a list of nests (MNL: one per route).
std::vector<Nest> nests_of(const GevModel& m);

std::vector<double> mnl_probabilities(std::span<const double> impedances, double theta0);

/// Probabilities for any nest list; evaluated in log space so small
/// deltas and large cost spreads do not overflow.
std::vector<double> nested_probabilities(std::span<const Nest> nests, std::span<const double> impedances,
                                         double theta0);

/// One nest per link used by a route, alpha_kl = c_l / C_k.
GevModel build_lnl(const Network& net, const ChoiceSet& cs, const DeltaRule& rule, double theta0);
std::vector<double> cnl_probabilities(const GevModel& m, std::span<const double> impedances);

/// sigma_kk' = C_kk' / (C_k + C_k' - C_kk').
GevModel build_pcl(const Network& net, const ChoiceSet& cs, double theta0);
std::vector<double> pcl_probabilities(const GevModel& m, std::span<const double> impedances);

std::vector<double> gev_probabilities(const GevModel& m, std::span<const double> impedances);

}  // namespace routecorr
