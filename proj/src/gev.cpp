#include "routecorr/gev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "routecorr/error.hpp"

namespace routecorr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void check_theta0(double theta0) {
  if (!(theta0 > 0.0) || !std::isfinite(theta0)) throw ModelError("theta0 must be positive");
}

void check_impedances(std::span<const double> c, std::size_t n) {
  if (c.size() != n) throw ValidationError("impedance vector has the wrong length");
}

}  // namespace

double theta0_from_cv(double cv, double c_min) {
  if (!(cv > 0.0) || !(c_min > 0.0)) throw ValidationError("cv and C_min must be positive");
  return std::sqrt(6.0) * cv * c_min / std::numbers::pi;
}

GevModel make_mnl(std::size_t n_routes, double theta0) {
  GevModel m{n_routes, theta0, MnlStructure{}};
  validate(m);
  return m;
}

GevModel make_cnl(std::vector<Nest> nests, std::size_t n_routes, double theta0) {
  GevModel m{n_routes, theta0, CnlStructure{std::move(nests)}};
  validate(m);
  return m;
}

GevModel make_pcl(Eigen::MatrixXd sigma, double theta0) {
  const auto n = static_cast<std::size_t>(sigma.rows());
  sigma.diagonal().setZero();
  GevModel m{n, theta0, PclStructure{std::move(sigma)}};
  validate(m);
  return m;
}

void validate(const GevModel& m) {
  check_theta0(m.theta0);
  if (m.n_routes == 0) throw ModelError("model has no routes");
  if (const auto* c = std::get_if<CnlStructure>(&m.structure)) {
    std::vector<double> row(m.n_routes, 0.0);
    for (const Nest& nest : c->nests) {
      if (!(nest.delta > 0.0 && nest.delta <= 1.0)) throw ModelError("nesting parameter outside (0, 1]");
      if (nest.alpha.size() != nest.routes.size()) throw ModelError("nest alpha/route size mismatch");
      for (std::size_t i = 0; i < nest.routes.size(); ++i) {
        if (nest.routes[i] >= m.n_routes) throw ModelError("nest references an unknown route");
        if (!(nest.alpha[i] >= 0.0)) throw ModelError("negative inclusion coefficient");
        row[nest.routes[i]] += nest.alpha[i];
      }
    }
    for (double s : row)
      if (std::abs(s - 1.0) > 1e-9) throw ModelError("inclusion coefficients of a route do not sum to 1");
  } else if (const auto* p = std::get_if<PclStructure>(&m.structure)) {
    const auto& s = p->sigma;
    if (static_cast<std::size_t>(s.rows()) != m.n_routes || s.rows() != s.cols())
      throw ModelError("similarity matrix has the wrong shape");
    if (m.n_routes < 2) throw ModelError("paired model needs at least two routes");
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index j = 0; j < s.cols(); ++j) {
        if (i == j) continue;
        if (std::abs(s(i, j) - s(j, i)) > 1e-12) throw ModelError("similarity matrix not symmetric");
        if (!(s(i, j) >= 0.0 && s(i, j) < 1.0)) throw ModelError("similarity outside [0, 1)");
      }
  }
}

std::vector<Nest> nests_of(const GevModel& m) {
  std::vector<Nest> out;
  if (std::holds_alternative<MnlStructure>(m.structure)) {
    for (std::size_t k = 0; k < m.n_routes; ++k) out.push_back({{k}, {1.0}, 1.0, std::nullopt});
  } else if (const auto* c = std::get_if<CnlStructure>(&m.structure)) {
    out = c->nests;
  } else {
    const auto& s = std::get<PclStructure>(m.structure).sigma;
    for (std::size_t i = 0; i < m.n_routes; ++i)
      for (std::size_t j = i + 1; j < m.n_routes; ++j)
        out.push_back({{i, j}, {1.0, 1.0}, 1.0 - s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                       std::nullopt});
  }
  return out;
}

std::vector<double> mnl_probabilities(std::span<const double> impedances, double theta0) {
  check_theta0(theta0);
  std::vector<double> v(impedances.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = -impedances[k] / theta0;
  const double lse = log_sum_exp(v);
  for (double& x : v) x = std::exp(x - lse);
  return v;
}

std::vector<double> nested_probabilities(std::span<const Nest> nests, std::span<const double> impedances,
                                         double theta0) {
  check_theta0(theta0);
  const std::size_t n = impedances.size();
  double cmin = std::numeric_limits<double>::infinity();
  for (double c : impedances) cmin = std::min(cmin, c);

  // z_kl = (ln alpha_kl + V_k) / delta_l with V_k = -(C_k - C_min) / theta0
  std::vector<std::vector<double>> z(nests.size());
  std::vector<double> log_s(nests.size()), log_t(nests.size());
  for (std::size_t l = 0; l < nests.size(); ++l) {
    const Nest& nest = nests[l];
    z[l].resize(nest.routes.size());
    for (std::size_t i = 0; i < nest.routes.size(); ++i) {
      const std::size_t k = nest.routes[i];
      if (k >= n) throw ModelError("nest references an unknown route");
      const double a = nest.alpha[i];
      z[l][i] = a > 0.0 ? (std::log(a) - (impedances[k] - cmin) / theta0) / nest.delta : kNegInf;
    }
    log_s[l] = log_sum_exp(z[l]);
    log_t[l] = log_s[l] == kNegInf ? kNegInf : nest.delta * log_s[l];
  }
  const double log_g = log_sum_exp(log_t);
  if (log_g == kNegInf) throw ModelError("all nest contributions vanish");

  std::vector<double> p(n, 0.0);
  for (std::size_t l = 0; l < nests.size(); ++l) {
    if (log_t[l] == kNegInf) continue;
    const double nest_share = log_t[l] - log_g;
    for (std::size_t i = 0; i < nests[l].routes.size(); ++i)
      if (z[l][i] != kNegInf) p[nests[l].routes[i]] += std::exp(z[l][i] - log_s[l] + nest_share);
  }
  return p;
}

GevModel build_lnl(const Network& net, const ChoiceSet& cs, const DeltaRule& rule, double theta0) {
  if (cs.size() == 0) throw ValidationError("empty choice set");
  if (!(rule.delta_min >= 0.0 && rule.delta_min <= 1.0)) throw ValidationError("delta_min outside [0, 1]");
  std::map<LinkId, Nest> by_link;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const Route& r = cs.routes[k];
    for (LinkId l : r.links) {
      Nest& nest = by_link[l];
      nest.link = l;
      nest.routes.push_back(k);
      nest.alpha.push_back(net.impedance(l) / r.impedance);
    }
  }
  const double floor = std::max(rule.delta_min, kDeltaFloor);
  std::vector<Nest> nests;
  for (auto& [l, nest] : by_link) {
    double d = floor;
    const double nl = static_cast<double>(nest.alpha.size());
    if (rule.kind == DeltaRuleKind::Arithmetic) {
      double s = 0.0;
      for (double a : nest.alpha) s += a;
      d = 1.0 - s / nl;
    } else if (rule.kind == DeltaRuleKind::Geometric) {
      double s = 0.0;
      for (double a : nest.alpha) s += std::log(a);
      d = 1.0 - std::exp(s / nl);
    }
    nest.delta = std::min(1.0, std::max(d, floor));
    nests.push_back(std::move(nest));
  }
  return make_cnl(std::move(nests), cs.size(), theta0);
}

std::vector<double> cnl_probabilities(const GevModel& m, std::span<const double> impedances) {
  const auto* c = std::get_if<CnlStructure>(&m.structure);
  if (!c) throw ModelError("not a cross-nested model");
  check_impedances(impedances, m.n_routes);
  return nested_probabilities(c->nests, impedances, m.theta0);
}

GevModel build_pcl(const Network& net, const ChoiceSet& cs, double theta0) {
  const auto n = static_cast<Eigen::Index>(cs.size());
  if (n < 2) throw ValidationError("paired model needs at least two routes");
  const Eigen::MatrixXd ov = overlap_matrix(net, cs);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double s = ov(i, j) / (ov(i, i) + ov(j, j) - ov(i, j));
      if (!(s < 1.0)) throw ModelError("fully overlapping routes give similarity 1");
      sigma(i, j) = sigma(j, i) = s;
    }
  return make_pcl(std::move(sigma), theta0);
}

std::vector<double> pcl_probabilities(const GevModel& m, std::span<const double> impedances) {
  if (!std::holds_alternative<PclStructure>(m.structure)) throw ModelError("not a paired model");
  check_impedances(impedances, m.n_routes);
  const auto nests = nests_of(m);
  return nested_probabilities(nests, impedances, m.theta0);
}

std::vector<double> gev_probabilities(const GevModel& m, std::span<const double> impedances) {
  check_impedances(impedances, m.n_routes);
  if (std::holds_alternative<MnlStructure>(m.structure)) return mnl_probabilities(impedances, m.theta0);
  const auto nests = nests_of(m);
  return nested_probabilities(nests, impedances, m.theta0);
}

}  // namespace routecorr
