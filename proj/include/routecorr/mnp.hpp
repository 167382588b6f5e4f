#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "routecorr/netgraph.hpp"

namespace routecorr {

/// xi = cv^2 * C_min.
double xi_from_cv(double cv, double c_min);

struct DsMoments {
  Eigen::MatrixXd cov;   // xi * overlap
  Eigen::MatrixXd corr;  // overlap / sqrt(C_k C_k')
};

DsMoments ds_moments(const Network& net, const ChoiceSet& cs, double xi);

struct MnpSpec {
  double xi = 0.0;
  std::uint64_t n_draws = 1'000'000;
  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct MnpResult {
  std::vector<double> probabilities;
  std::vector<double> std_errors;  // binomial, sqrt(p(1-p)/n)
  std::vector<std::uint64_t> counts;
  std::uint64_t n_draws = 0;
};

/// Perceived link impedances c_l + sqrt(xi c_l) z, untruncated; the
/// minimum-impedance route wins, ties to the lowest route index.
MnpResult simulate_mnp_probabilities(const Network& net, const ChoiceSet& cs, const MnpSpec& spec);

/// Perceived route impedances for one draw, same stream as the simulator.
std::vector<double> perceived_route_impedances(const Network& net, const ChoiceSet& cs, const MnpSpec& spec,
                                               std::uint64_t draw);

}  // namespace routecorr
