#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "routecorr/gev.hpp"

namespace routecorr {

struct QuadratureSpec {
  /// Truncation half-width in cost units; 0 selects 40 * max(1, theta0).
  double half_width = 0.0;
  /// Breakpoints of the uniform base grid; each panel gets a 5-point
  /// Gauss-Legendre rule, with extra panels around sharp nest features.
  std::size_t nodes = 4001;
  /// Allowed deviation of the integrated density mass from 1.
  double mass_tolerance = 1e-10;
};

/// Distribution of eps_k - eps_k' (unit scale) for a pair of alternatives of a
/// GEV model. survival(x) is the binary choice probability y G_k / G evaluated
/// at y = e^{-x} in slot k, 1 in slot k', 0 elsewhere.
class PairDifference {
 public:
  PairDifference(std::span<const Nest> nests, std::size_t k, std::size_t k2);

  double survival(double x) const;
  double density(double x) const;
  /// ln a_k - ln a_k'.
  double mean_shift() const { return std::log(a_k_) - std::log(a_k2_); }
  /// Points where the density changes on a scale narrower than 1, with that scale.
  std::vector<std::pair<double, double>> features() const;

 private:
  struct Shared {
    double log_a, log_b, delta;
  };
  struct Terms {
    double g, n, r, not_n;  // relative to a common factor
  };
  Terms eval(double x) const;

  double a_only_ = 0.0;  // sum of alpha_k over nests without k'
  double b_only_ = 0.0;
  std::vector<Shared> shared_;
  double a_k_ = 0.0, a_k2_ = 0.0;
};

/// E[eps_k] = theta0 (gamma_E + ln a_k), a_k = G(e_k).
double marginal_mean(const GevModel& m, std::size_t k);

struct PairMoments {
  double covariance;   // cost units
  double mass;         // integrated density, close to 1
  double second_moment;  // E[D^2], unit scale
};

PairMoments gev_pair_moments(const GevModel& m, std::size_t k, std::size_t k2, const QuadratureSpec& q = {});
double gev_covariance(const GevModel& m, std::size_t k, std::size_t k2, const QuadratureSpec& q = {});
/// Correlations with the common marginal variance pi^2 theta0^2 / 6.
Eigen::MatrixXd gev_fcm(const GevModel& m, const QuadratureSpec& q = {});

/// Correlations of (eps_k - eps_r), k != r, from a covariance (or a
/// correlation matrix standing in for one). Output is (n-1) x (n-1).
Eigen::MatrixXd reduce_to_rcm(const Eigen::MatrixXd& cov, std::size_t ref);

/// Reference for the reduced comparison: the candidate whose independence-vs-
/// target reduced MSE is the lower median across all candidates.
std::size_t anchored_rcm_reference(const Eigen::MatrixXd& target_cov);

}  // namespace routecorr
