#include "routecorr/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "routecorr/error.hpp"
#include "routecorr/gev.hpp"
#include "routecorr/routegen.hpp"

namespace routecorr {

namespace {

struct ModelEntry {
  ModelKind kind;
  const char* name;
};
constexpr ModelEntry kModels[] = {{ModelKind::Mnl, "mnl"},         {ModelKind::LnlConst, "lnl-const"},
                                  {ModelKind::LnlArith, "lnl-arith"}, {ModelKind::LnlGeom, "lnl-geom"},
                                  {ModelKind::Pcl, "pcl"},         {ModelKind::Conl, "conl"}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, const char* what) {
  s = trim(s);
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError(std::string("invalid ") + what + " '" + std::string(s) + "'");
  return v;
}

double round12(double v) { return std::round(v * 1e12) / 1e12; }

std::string variant_of(ModelKind m, WeightFormula w) {
  switch (m) {
    case ModelKind::LnlConst: return "constant";
    case ModelKind::LnlArith: return "arithmetic";
    case ModelKind::LnlGeom: return "geometric";
    case ModelKind::Conl: return "w" + std::to_string(static_cast<int>(w));
    default: return "-";
  }
}

bool uses_delta_min(ModelKind m) { return m != ModelKind::Mnl && m != ModelKind::Pcl; }

DeltaRule lnl_rule(ModelKind m, double delta_min) {
  switch (m) {
    case ModelKind::LnlConst: return {DeltaRuleKind::Constant, delta_min};
    case ModelKind::LnlArith: return {DeltaRuleKind::Arithmetic, delta_min};
    case ModelKind::LnlGeom: return {DeltaRuleKind::Geometric, delta_min};
    default: throw ValidationError("not a link-nested model");
  }
}

}  // namespace

ModelKind parse_model(std::string_view name) {
  for (const auto& e : kModels)
    if (name == e.name) return e.kind;
  throw ValidationError("unknown model '" + std::string(name) + "'");
}

std::string model_name(ModelKind m) {
  for (const auto& e : kModels)
    if (e.kind == m) return e.name;
  return "?";
}

std::vector<ModelKind> parse_model_list(std::string_view csv) {
  std::vector<ModelKind> out;
  for (auto s : split(csv, ','))
    if (!s.empty()) out.push_back(parse_model(s));
  if (out.empty()) throw ValidationError("empty model list");
  return out;
}

double mse_probabilities(std::span<const double> p_model, std::span<const double> p_target) {
  if (p_model.size() != p_target.size()) throw ValidationError("probability vectors differ in length");
  if (p_model.empty()) throw ValidationError("empty probability vector");
  double s = 0.0;
  for (std::size_t k = 0; k < p_model.size(); ++k) s += (p_model[k] - p_target[k]) * (p_model[k] - p_target[k]);
  return s / static_cast<double>(p_model.size()) * 1e4;
}

double mse_probabilities_stderr(std::span<const double> p_model, std::span<const double> p_target,
                                std::uint64_t n_draws) {
  if (p_model.size() != p_target.size()) throw ValidationError("probability vectors differ in length");
  if (n_draws == 0) throw ValidationError("n_draws must be positive");
  const std::size_t n = p_model.size();
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = -2e4 * (p_model[k] - p_target[k]) / static_cast<double>(n);
  // multinomial covariance (diag(p) - p p^T) / N
  double gp = 0.0, gpg = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    gp += g[k] * p_target[k];
    gpg += g[k] * g[k] * p_target[k];
  }
  const double var = (gpg - gp * gp) / static_cast<double>(n_draws);
  return std::sqrt(std::max(var, 0.0));
}

double mse_correlations(const Eigen::MatrixXd& r_model, const Eigen::MatrixXd& r_target, CorrSpace) {
  if (r_model.rows() != r_target.rows() || r_model.cols() != r_target.cols())
    throw ValidationError("correlation matrices differ in shape");
  if (r_model.size() == 0) throw ValidationError("empty correlation matrix");
  return (r_model - r_target).squaredNorm() / static_cast<double>(r_model.size()) * 1e3;
}

std::vector<double> model_probabilities(ModelKind m, const Network& net, const ChoiceSet& cs, double cv,
                                        double delta_min, WeightFormula weights) {
  const double theta0 = theta0_from_cv(cv, cs.min_impedance());
  const auto c = cs.impedances();
  switch (m) {
    case ModelKind::Mnl: return mnl_probabilities(c, theta0);
    case ModelKind::Pcl: return pcl_probabilities(build_pcl(net, cs, theta0), c);
    case ModelKind::Conl: return conl_probabilities(build_conl(net, cs, weights, delta_min, theta0), c);
    default: return cnl_probabilities(build_lnl(net, cs, lnl_rule(m, delta_min), theta0), c);
  }
}

Eigen::MatrixXd model_fcm(ModelKind m, const Network& net, const ChoiceSet& cs, double delta_min,
                          WeightFormula weights, const QuadratureSpec& q) {
  // correlations do not depend on the overall scale
  const double theta0 = 1.0;
  switch (m) {
    case ModelKind::Mnl: return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(cs.size()),
                                                          static_cast<Eigen::Index>(cs.size()));
    case ModelKind::Pcl: return gev_fcm(build_pcl(net, cs, theta0), q);
    case ModelKind::Conl: return conl_fcm(build_conl(net, cs, weights, delta_min, theta0)).corr;
    default: return gev_fcm(build_lnl(net, cs, lnl_rule(m, delta_min), theta0), q);
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.models.empty()) throw ValidationError("model list is empty");
  if (cfg.delta_min.empty()) throw ValidationError("delta_min grid is empty");
  if (cfg.cv.empty()) throw ValidationError("cv list is empty");
  for (double d : cfg.delta_min)
    if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("delta_min values must lie in [0, 1]");
  for (double c : cfg.cv)
    if (!(c > 0.0)) throw ValidationError("cv values must be positive");
  if (cfg.draws < 1) throw ValidationError("draws must be at least 1");
  if (!(cfg.gamma > 0.0)) throw ValidationError("gamma must be positive");
}

MseReport run_grid(const ExperimentConfig& cfg) {
  validate(cfg);
  const Fixture fx = resolve_network(cfg.network, cfg.od);
  const ChoiceSet cs = enumerate_efficient_routes(fx.network, fx.od);
  MseReport r = run_grid(fx.network, cs, cfg);
  r.network = cfg.network;
  return r;
}

MseReport run_grid(const Network& net, const ChoiceSet& cs, const ExperimentConfig& cfg) {
  validate(cfg);
  if (cs.size() < 2) throw ValidationError("experiments need at least two routes");
  MseReport rep;
  rep.od = cs.od;
  rep.choice_set = cs;
  const double c_min = cs.min_impedance();

  std::vector<double> dgrid = cfg.delta_min;
  std::sort(dgrid.begin(), dgrid.end());
  dgrid.erase(std::unique(dgrid.begin(), dgrid.end()), dgrid.end());

  const Eigen::MatrixXd ds_cov = overlap_matrix(net, cs);
  const Eigen::MatrixXd ds_fcm = ds_moments(net, cs, 1.0).corr;
  rep.rcm_reference = cfg.rcm_reference ? *cfg.rcm_reference : anchored_rcm_reference(ds_cov);
  if (rep.rcm_reference >= cs.size()) throw ValidationError("rcm reference out of range");
  const Eigen::MatrixXd ds_rcm = reduce_to_rcm(ds_cov, rep.rcm_reference);

  for (double cv : cfg.cv) {
    MnpSpec spec{xi_from_cv(cv, c_min), cfg.draws, cfg.seed, cfg.threads};
    const MnpResult res = simulate_mnp_probabilities(net, cs, spec);
    rep.mnp.push_back({cv, spec.xi, cfg.draws, res.probabilities, res.std_errors});
  }

  for (ModelKind m : cfg.models) {
    std::optional<std::pair<double, double>> fixed_corr;
    for (double d : dgrid) {
      std::pair<double, double> corr;
      if (!uses_delta_min(m) && fixed_corr) {
        corr = *fixed_corr;
      } else {
        const Eigen::MatrixXd fcm = model_fcm(m, net, cs, d, cfg.weights, cfg.quadrature);
        corr = {mse_correlations(fcm, ds_fcm, CorrSpace::Fcm),
                mse_correlations(reduce_to_rcm(fcm, rep.rcm_reference), ds_rcm, CorrSpace::Rcm)};
        fixed_corr = corr;
      }
      for (const MnpTarget& t : rep.mnp) {
        const double theta0 = theta0_from_cv(t.cv, c_min);
        std::vector<double> p;
        if (m == ModelKind::Conl)
          p = conl_probabilities(build_conl(net, cs, cfg.weights, d, theta0, cfg.gamma), cs.impedances());
        else
          p = model_probabilities(m, net, cs, t.cv, d, cfg.weights);
        rep.rows.push_back({m, variant_of(m, cfg.weights), d, t.cv, mse_probabilities(p, t.probabilities),
                            corr.first, corr.second, mse_probabilities_stderr(p, t.probabilities, t.draws)});
      }
    }
  }
  return rep;
}

void write_table_csv(std::ostream& out, const MseReport& report) {
  out << "model,variant,dmin,cv,prob_mse_x1e4,fcm_mse_x1e3,rcm_mse_x1e3\n";
  for (const auto& r : report.rows) {
    out << model_name(r.model) << ',' << r.variant << ',' << std::setprecision(6) << std::defaultfloat
        << r.delta_min << ',' << r.cv << ',' << std::fixed << std::setprecision(6) << r.prob_mse_x1e4 << ','
        << r.fcm_mse_x1e3 << ',' << r.rcm_mse_x1e3 << '\n'
        << std::defaultfloat;
  }
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + p.string());
  return f;
}

std::string label(const MseRow& r) {
  return r.variant == "-" ? model_name(r.model) : model_name(r.model) + ":" + r.variant;
}

void write_curve(const std::filesystem::path& p, const MseReport& rep, std::optional<double> cv,
                 double MseRow::*field) {
  std::vector<std::string> labels;
  std::map<double, std::map<std::string, double>> grid;
  for (const auto& r : rep.rows) {
    if (cv && r.cv != *cv) continue;
    if (!cv && r.cv != rep.mnp.front().cv) continue;
    const auto l = label(r);
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    grid[r.delta_min][l] = r.*field;
  }
  auto f = open_out(p);
  f << "dmin";
  for (const auto& l : labels) f << ',' << l;
  f << '\n';
  for (const auto& [d, vals] : grid) {
    f << std::defaultfloat << std::setprecision(6) << d << std::fixed << std::setprecision(6);
    for (const auto& l : labels) f << ',' << vals.at(l);
    f << '\n' << std::defaultfloat;
  }
  if (!f) throw ValidationError("failed writing " + p.string());
}

std::string cv_tag(double cv) {
  std::ostringstream s;
  s << cv;
  return s.str();
}

}  // namespace

std::vector<std::filesystem::path> emit_outputs(const MseReport& report, const std::filesystem::path& dir) {
  if (report.rows.empty()) throw ValidationError("report is empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  const auto table = dir / "table.csv";
  {
    auto f = open_out(table);
    write_table_csv(f, report);
    if (!f) throw ValidationError("failed writing " + table.string());
  }
  written.push_back(table);

  const auto target = dir / "mnp_target.csv";
  {
    auto f = open_out(target);
    f << "cv,route_index,probability,std_error\n";
    for (const auto& t : report.mnp)
      for (std::size_t k = 0; k < t.probabilities.size(); ++k)
        f << std::defaultfloat << std::setprecision(6) << t.cv << ',' << k << ',' << std::fixed
          << std::setprecision(8) << t.probabilities[k] << ',' << t.std_errors[k] << '\n'
          << std::defaultfloat;
    if (!f) throw ValidationError("failed writing " + target.string());
  }
  written.push_back(target);

  for (const auto& t : report.mnp) {
    auto p = dir / ("curve_prob_cv" + cv_tag(t.cv) + ".csv");
    write_curve(p, report, t.cv, &MseRow::prob_mse_x1e4);
    written.push_back(p);
  }
  auto fcm = dir / "curve_fcm.csv";
  write_curve(fcm, report, std::nullopt, &MseRow::fcm_mse_x1e3);
  written.push_back(fcm);
  auto rcm = dir / "curve_rcm.csv";
  write_curve(rcm, report, std::nullopt, &MseRow::rcm_mse_x1e3);
  written.push_back(rcm);
  return written;
}

OdPair parse_od(std::string_view text) {
  auto parts = split(text, '-');
  if (parts.size() != 2) throw ValidationError("od must look like ORIGIN-DESTINATION");
  return {parse_number<NodeId>(parts[0], "origin"), parse_number<NodeId>(parts[1], "destination")};
}

std::vector<double> parse_grid(std::string_view text) {
  text = trim(text);
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    auto p = split(text, ':');
    if (p.size() != 3) throw ValidationError("range must look like start:stop:step");
    const double a = parse_number<double>(p[0], "range start"), b = parse_number<double>(p[1], "range stop"),
                 s = parse_number<double>(p[2], "range step");
    if (!(s > 0.0) || b < a) throw ValidationError("range needs a positive step and stop >= start");
    const auto n = static_cast<long>(std::floor((b - a) / s + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(round12(a + s * static_cast<double>(i)));
  } else {
    for (auto v : split(text, ','))
      if (!v.empty()) out.push_back(parse_number<double>(v, "grid value"));
  }
  if (out.empty()) throw ValidationError("empty grid");
  return out;
}

Fixture resolve_network(std::string_view spec, std::optional<OdPair> od) {
  spec = trim(spec);
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), head) != names.end()) {
    Params params;
    if (colon != std::string_view::npos)
      for (auto kv : split(spec.substr(colon + 1), ',')) {
        if (kv.empty()) continue;
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw ValidationError("network parameter must be key=value");
        params[std::string(trim(kv.substr(0, eq)))] = parse_number<double>(kv.substr(eq + 1), "parameter");
      }
    Fixture fx = builtin_network(head, params);
    if (od) {
      validate_od(fx.network, *od);
      fx.od = *od;
    }
    return fx;
  }
  NetworkFile f = load_network_file(std::string(spec));
  if (!od && f.od_pairs.empty()) throw ValidationError("network file has no od line; pass an od pair");
  Fixture fx{std::move(f.network), od ? *od : f.od_pairs.front()};
  validate_od(fx.network, fx.od);
  return fx;
}

}  // namespace routecorr
