#include "routecorr/gevcov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "routecorr/error.hpp"

namespace routecorr {

namespace {

constexpr double kPi2Over6 = std::numbers::pi * std::numbers::pi / 6.0;

// 5-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 5> kGlX{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
constexpr std::array<double, 5> kGlW{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};

double sigmoid(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

void check_route(const GevModel& m, std::size_t k) {
  if (k >= m.n_routes) throw ValidationError("route index out of range");
}

}  // namespace

PairDifference::PairDifference(std::span<const Nest> nests, std::size_t k, std::size_t k2) {
  if (k == k2) throw ValidationError("pair needs two distinct routes");
  for (const Nest& nest : nests) {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < nest.routes.size(); ++i) {
      if (nest.routes[i] == k) a += nest.alpha[i];
      if (nest.routes[i] == k2) b += nest.alpha[i];
    }
    a_k_ += a;
    a_k2_ += b;
    if (a > 0.0 && b > 0.0)
      shared_.push_back({std::log(a), std::log(b), nest.delta});
    else if (a > 0.0)
      a_only_ += a;
    else if (b > 0.0)
      b_only_ += b;
  }
  if (!(a_k_ > 0.0) || !(a_k2_ > 0.0)) throw ModelError("route with zero generating value");
}

// With u = (a e^{-x})^{1/delta}, v = b^{1/delta}, S = u + v and q = u / S, a shared
// nest adds S^delta to G and S^delta q to N = y G_k; -dN/dx gains
// S^delta q (q + (1-q)/delta) = S^delta q + S^delta q (1-q)(1/delta - 1).
// The density is then N/G (1 - N/G) + R/G with R the sum of the last terms.
PairDifference::Terms PairDifference::eval(double x) const {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double la = a_only_ > 0.0 ? std::log(a_only_) - x : neg_inf;
  const double lb = b_only_ > 0.0 ? std::log(b_only_) : neg_inf;
  double mx = std::max(la, lb);
  thread_local std::vector<std::array<double, 3>> buf;  // ln S^delta, q, 1-q
  buf.resize(shared_.size());
  for (std::size_t s = 0; s < shared_.size(); ++s) {
    const Shared& sh = shared_[s];
    const double lu = (sh.log_a - x) / sh.delta, lv = sh.log_b / sh.delta;
    const double m = std::max(lu, lv);
    const double ls = m + std::log(std::exp(lu - m) + std::exp(lv - m));
    buf[s] = {sh.delta * ls, sigmoid(lu - lv), sigmoid(lv - lu)};
    mx = std::max(mx, buf[s][0]);
  }
  Terms t{0, 0, 0, 0};
  if (la != neg_inf) {
    const double e = std::exp(la - mx);
    t.g += e;
    t.n += e;
  }
  if (lb != neg_inf) {
    const double e = std::exp(lb - mx);
    t.g += e;
    t.not_n += e;
  }
  for (std::size_t s = 0; s < shared_.size(); ++s) {
    const double e = std::exp(buf[s][0] - mx);
    const double q = buf[s][1], nq = buf[s][2];
    t.g += e;
    t.n += e * q;
    t.not_n += e * nq;
    t.r += e * q * nq * (1.0 / shared_[s].delta - 1.0);
  }
  return t;
}

double PairDifference::survival(double x) const {
  const Terms t = eval(x);
  return t.n / t.g;
}

double PairDifference::density(double x) const {
  const Terms t = eval(x);
  return (t.n / t.g) * (t.not_n / t.g) + t.r / t.g;
}

std::vector<std::pair<double, double>> PairDifference::features() const {
  std::vector<std::pair<double, double>> f;
  for (const Shared& s : shared_)
    if (s.delta < 1.0) f.emplace_back(s.log_a - s.log_b, s.delta);
  return f;
}

double marginal_mean(const GevModel& m, std::size_t k) {
  check_route(m, k);
  double a = 0.0;
  for (const Nest& nest : nests_of(m))
    for (std::size_t i = 0; i < nest.routes.size(); ++i)
      if (nest.routes[i] == k) a += nest.alpha[i];
  if (!(a > 0.0)) throw ModelError("route with zero generating value");
  return m.theta0 * (std::numbers::egamma + std::log(a));
}

namespace {

std::vector<double> breakpoints(const PairDifference& d, double half, std::size_t nodes) {
  if (nodes < 3) throw ValidationError("quadrature needs at least 3 nodes");
  const double h = 2.0 * half / static_cast<double>(nodes - 1);
  std::vector<double> pts(nodes);
  for (std::size_t i = 0; i < nodes; ++i) pts[i] = -half + h * static_cast<double>(i);
  pts.back() = half;
  // a nest with delta < 2h adds a spike of width delta around its centre that
  // decays like exp(-|x - c| / delta); cover it with panels of width delta / 2
  for (const auto& [c, w] : d.features()) {
    if (w >= 2.0 * h) continue;
    const double step = 0.5 * w;
    for (int i = -80; i <= 80; ++i) {
      const double x = c + step * i;
      if (x > -half && x < half) pts.push_back(x);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

PairMoments gev_pair_moments(const GevModel& m, std::size_t k, std::size_t k2, const QuadratureSpec& q) {
  check_route(m, k);
  check_route(m, k2);
  validate(m);
  const auto nests = nests_of(m);
  const PairDifference d(nests, k, k2);
  const double half_cost = q.half_width > 0.0 ? q.half_width : 40.0 * std::max(1.0, m.theta0);
  const double half = half_cost / m.theta0;
  const auto pts = breakpoints(d, half, q.nodes);

  double mass = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]), hw = 0.5 * (pts[i + 1] - pts[i]);
    for (std::size_t j = 0; j < kGlX.size(); ++j) {
      const double x = mid + hw * kGlX[j];
      const double f = d.density(x) * kGlW[j] * hw;
      mass += f;
      m2 += x * x * f;
    }
  }
  if (!(std::abs(mass - 1.0) <= q.mass_tolerance))
    throw QuadratureError("difference density integrates to " + std::to_string(mass - 1.0) +
                          "; widen the truncation or add nodes");
  const double shift = d.mean_shift();
  const double unit = kPi2Over6 - 0.5 * m2 + 0.5 * shift * shift;
  return {unit * m.theta0 * m.theta0, mass, m2};
}

double gev_covariance(const GevModel& m, std::size_t k, std::size_t k2, const QuadratureSpec& q) {
  return gev_pair_moments(m, k, k2, q).covariance;
}

Eigen::MatrixXd gev_fcm(const GevModel& m, const QuadratureSpec& q) {
  validate(m);
  const auto n = static_cast<Eigen::Index>(m.n_routes);
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  if (std::holds_alternative<MnlStructure>(m.structure)) return r;
  const double var = kPi2Over6 * m.theta0 * m.theta0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = gev_covariance(m, static_cast<std::size_t>(i), static_cast<std::size_t>(j), q);
      r(i, j) = r(j, i) = c / var;
    }
  return r;
}

Eigen::MatrixXd reduce_to_rcm(const Eigen::MatrixXd& cov, std::size_t ref) {
  const Eigen::Index n = cov.rows();
  if (cov.cols() != n) throw ValidationError("covariance matrix must be square");
  if (n < 2) throw ValidationError("reduction needs at least two routes");
  const auto r = static_cast<Eigen::Index>(ref);
  if (r < 0 || r >= n) throw ValidationError("reference index out of range");

  // entries of B cov B^T with rows e_k - e_r, filled symmetrically
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != r) keep.push_back(i);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd red(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a; b < m; ++b) {
      const Eigen::Index i = keep[a], j = keep[b];
      red(a, b) = red(b, a) = cov(i, j) - cov(i, r) - cov(r, j) + cov(r, r);
    }
  const double scale = cov.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index a = 0; a < m; ++a)
    if (!(red(a, a) > 1e-12 * scale)) throw ValidationError("zero difference variance");
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a + 1; b < m; ++b)
      out(a, b) = out(b, a) = red(a, b) / std::sqrt(red(a, a) * red(b, b));
  return out;
}

std::size_t anchored_rcm_reference(const Eigen::MatrixXd& target_cov) {
  const auto n = static_cast<std::size_t>(target_cov.rows());
  if (n < 2) throw ValidationError("reduction needs at least two routes");
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(target_cov.rows(), target_cov.cols());
  std::vector<double> score(n);
  for (std::size_t r = 0; r < n; ++r)
    // rounded so that symmetric candidates tie exactly and fall back to index order
    score[r] = std::round((reduce_to_rcm(ident, r) - reduce_to_rcm(target_cov, r)).squaredNorm() * 1e12);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  return order[(n - 1) / 2];
}

}  // namespace routecorr
