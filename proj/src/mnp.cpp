#include "routecorr/mnp.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "routecorr/error.hpp"
#include "routecorr/random.hpp"

namespace routecorr {

double xi_from_cv(double cv, double c_min) {
  if (!(cv > 0.0) || !(c_min > 0.0)) throw ValidationError("cv and C_min must be positive");
  return cv * cv * c_min;
}

DsMoments ds_moments(const Network& net, const ChoiceSet& cs, double xi) {
  if (!(xi > 0.0)) throw ValidationError("xi must be positive");
  const Eigen::MatrixXd ov = overlap_matrix(net, cs);
  const Eigen::Index n = ov.rows();
  DsMoments m;
  m.cov = xi * ov;
  m.corr = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      m.corr(i, j) = m.corr(j, i) = ov(i, j) / std::sqrt(ov(i, i) * ov(j, j));
  return m;
}

namespace {

// Links of the choice set, with routes stored as positions into that list.
struct Incidence {
  std::vector<LinkId> links;
  std::vector<double> mean, sd;
  std::vector<std::vector<std::size_t>> routes;
};

Incidence incidence(const Network& net, const ChoiceSet& cs, double xi) {
  Incidence inc;
  for (const auto& r : cs.routes) inc.links.insert(inc.links.end(), r.links.begin(), r.links.end());
  std::sort(inc.links.begin(), inc.links.end());
  inc.links.erase(std::unique(inc.links.begin(), inc.links.end()), inc.links.end());
  for (LinkId l : inc.links) {
    double c = net.impedance(l);
    inc.mean.push_back(c);
    inc.sd.push_back(std::sqrt(xi * c));
  }
  for (const auto& r : cs.routes) {
    std::vector<std::size_t> pos;
    for (LinkId l : r.links)
      pos.push_back(static_cast<std::size_t>(std::lower_bound(inc.links.begin(), inc.links.end(), l) -
                                             inc.links.begin()));
    inc.routes.push_back(std::move(pos));
  }
  return inc;
}

// Keyed on the network link id so a draw does not depend on which routes are in the set.
void draw_routes(const Incidence& inc, std::uint64_t seed, std::uint64_t draw, std::vector<double>& link_buf,
                 std::vector<double>& out) {
  for (std::size_t i = 0; i < inc.links.size(); ++i)
    link_buf[i] = inc.mean[i] +
                  inc.sd[i] * rng::normal(seed, rng::kStreamMnp, draw, static_cast<std::uint64_t>(inc.links[i]));
  for (std::size_t k = 0; k < inc.routes.size(); ++k) {
    double c = 0.0;
    for (std::size_t p : inc.routes[k]) c += link_buf[p];
    out[k] = c;
  }
}

void check_spec(const ChoiceSet& cs, const MnpSpec& spec) {
  if (!(spec.xi > 0.0)) throw ValidationError("xi must be positive");
  if (spec.n_draws < 1) throw ValidationError("n_draws must be at least 1");
  if (cs.size() == 0) throw ValidationError("empty choice set");
}

}  // namespace

std::vector<double> perceived_route_impedances(const Network& net, const ChoiceSet& cs, const MnpSpec& spec,
                                               std::uint64_t draw) {
  check_spec(cs, spec);
  const Incidence inc = incidence(net, cs, spec.xi);
  std::vector<double> buf(inc.links.size()), out(cs.size());
  draw_routes(inc, spec.seed, draw, buf, out);
  return out;
}

MnpResult simulate_mnp_probabilities(const Network& net, const ChoiceSet& cs, const MnpSpec& spec) {
  check_spec(cs, spec);
  const Incidence inc = incidence(net, cs, spec.xi);
  const std::size_t n = cs.size();
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, spec.n_draws));

  std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(n, 0));
  auto work = [&](unsigned t) {
    const std::uint64_t lo = spec.n_draws * t / threads, hi = spec.n_draws * (t + 1) / threads;
    std::vector<double> buf(inc.links.size()), cost(n);
    for (std::uint64_t d = lo; d < hi; ++d) {
      draw_routes(inc, spec.seed, d, buf, cost);
      ++partial[t][static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin())];
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }

  MnpResult res;
  res.n_draws = spec.n_draws;
  res.counts.assign(n, 0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < n; ++k) res.counts[k] += p[k];
  const double N = static_cast<double>(spec.n_draws);
  for (std::size_t k = 0; k < n; ++k) {
    double p = static_cast<double>(res.counts[k]) / N;
    res.probabilities.push_back(p);
    res.std_errors.push_back(std::sqrt(p * (1.0 - p) / N));
  }
  return res;
}

}  // namespace routecorr
