// routecorr command line tool: routes, probs, corr, conl-structure, bench.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "routecorr/routecorr.hpp"

using namespace routecorr;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 1;

struct Common {
  std::string network = "mesh2x2";
  std::string od;
  std::string out = "-";
};

std::string config_path;

void add_config(CLI::App* sub) {
  sub->add_option("--config", config_path, "key=value file mirroring the flags; command line wins");
  sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_common(CLI::App* sub, Common& c) {
  add_config(sub);
  sub->add_option("--network", c.network, "built-in name, name:key=value,... or network file")
      ->capture_default_str();
  sub->add_option("--od", c.od, "origin-destination pair, e.g. 1-9 (default: the network's study pair)");
  sub->add_option("--out", c.out, "output file, - for stdout")->capture_default_str();
}

Fixture fixture_of(const Common& c) {
  std::optional<OdPair> od;
  if (!c.od.empty()) od = parse_od(c.od);
  return resolve_network(c.network, od);
}

// Writes through fn to stdout or to a file.
template <class Fn>
void with_output(const std::string& path, Fn fn) {
  if (path == "-" || path.empty()) {
    std::cout << std::setprecision(15);
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  f << std::setprecision(15);
  fn(f);
  if (!f) throw ValidationError("failed writing " + path);
}

std::string join_routes(const std::vector<std::size_t>& rs) {
  std::string s;
  for (std::size_t i = 0; i < rs.size(); ++i) s += (i ? ";" : "") + std::to_string(rs[i]);
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Splices "--key value" pairs from a --config file in front of the
// subcommand's own arguments, so explicit flags override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.starts_with("--config=");
  });
  if (it == args.end()) return args;
  std::string path;
  auto last = it + 1;
  if (*it == "--config") {
    if (last == args.end()) return args;  // let the parser report it
    path = *last++;
  } else {
    path = it->substr(9);
  }
  args.erase(it, last);

  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::vector<std::string> flags;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(n, "expected key=value");
    flags.push_back("--" + trim(line.substr(0, eq)));
    flags.push_back(trim(line.substr(eq + 1)));
  }
  auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) { return !a.starts_with("-"); });
  if (sub == args.end()) throw ValidationError("--config needs a subcommand");
  args.insert(sub + 1, flags.begin(), flags.end());
  return args;
}

// "mnp" names the probit target; everything else is a closed-form model.
bool is_mnp(const std::string& m) { return m == "mnp"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form route choice models against a probit target"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "routecorr 0.1.0");

  // routes
  Common rc;
  std::string mode = "efficient";
  std::uint64_t route_draws = 1000, route_seed = 42;
  double route_cv = 0.1;
  auto* routes = app.add_subcommand("routes", "enumerate or sample a choice set");
  add_common(routes, rc);
  routes->add_option("--mode", mode)->check(CLI::IsMember({"efficient", "sample"}))->capture_default_str();
  routes->add_option("--draws", route_draws, "perturbation draws in sample mode")->capture_default_str();
  routes->add_option("--cv", route_cv, "impedance coefficient of variation in sample mode")->capture_default_str();
  routes->add_option("--seed", route_seed)->capture_default_str();

  // probs and corr share model flags
  struct ModelFlags {
    std::string model = "mnl";
    double cv = 0.1;
    double dmin = 0.0;
    int weights = 25;
    double gamma = 1.0;
  };
  auto add_model_flags = [](CLI::App* sub, ModelFlags& f) {
    sub->add_option("--model", f.model, "mnp, mnl, lnl-const, lnl-arith, lnl-geom, pcl or conl")
        ->check(CLI::IsMember({"mnp", "mnl", "lnl-const", "lnl-arith", "lnl-geom", "pcl", "conl"}))
        ->capture_default_str();
    sub->add_option("--cv", f.cv, "coefficient of variation at the cheapest route")->capture_default_str();
    sub->add_option("--dmin", f.dmin, "lower bound on nesting parameters")->capture_default_str();
    sub->add_option("--weights", f.weights, "CoNL weight formula")
        ->check(CLI::IsMember({24, 25, 26, 27}))
        ->capture_default_str();
    sub->add_option("--gamma", f.gamma, "CoNL weight exponent")->capture_default_str();
  };

  Common pc;
  ModelFlags pf;
  std::uint64_t draws = 1'000'000, seed = 42;
  unsigned threads = 0;
  auto* probs = app.add_subcommand("probs", "route choice probabilities");
  add_common(probs, pc);
  add_model_flags(probs, pf);
  probs->add_option("--draws", draws, "probit draws")->capture_default_str();
  probs->add_option("--seed", seed)->capture_default_str();
  probs->add_option("--threads", threads, "0 uses all cores")->capture_default_str();

  Common cc;
  ModelFlags cf;
  std::string space = "fcm";
  std::optional<std::size_t> rcm_ref;
  std::size_t quad_nodes = QuadratureSpec{}.nodes;
  auto* corr = app.add_subcommand("corr", "utility correlation matrix");
  add_common(corr, cc);
  add_model_flags(corr, cf);
  corr->add_option("--space", space)->check(CLI::IsMember({"fcm", "rcm"}))->capture_default_str();
  corr->add_option("--rcm-ref", rcm_ref, "reference route (default: anchored search)");
  corr->add_option("--quad-nodes", quad_nodes, "quadrature base grid size")->capture_default_str();

  Common sc;
  int s_weights = 25;
  double s_dmin = 0.0, s_cv = 0.1, s_gamma = 1.0;
  auto* structure = app.add_subcommand("conl-structure", "CoNL components, weights, deltas and residuals");
  add_common(structure, sc);
  structure->add_option("--weights", s_weights)->check(CLI::IsMember({24, 25, 26, 27}))->capture_default_str();
  structure->add_option("--dmin", s_dmin)->capture_default_str();
  structure->add_option("--cv", s_cv)->capture_default_str();
  structure->add_option("--gamma", s_gamma)->capture_default_str();

  ExperimentConfig bc;
  std::string b_od, b_models = "mnl,lnl-const,lnl-arith,lnl-geom,pcl,conl", b_dmin = "0:1:0.1", b_cv = "0.1,0.2",
              b_out = "results";
  int b_weights = 25;
  std::size_t b_nodes = QuadratureSpec{}.nodes;
  auto* bench = app.add_subcommand("bench", "MSE grid over dmin and cv, written as CSV tables and curves");
  add_config(bench);
  bench->add_option("--network", bc.network)->capture_default_str();
  bench->add_option("--od", b_od);
  bench->add_option("--models", b_models)->capture_default_str();
  bench->add_option("--weights", b_weights)->check(CLI::IsMember({24, 25, 26, 27}))->capture_default_str();
  bench->add_option("--gamma", bc.gamma)->capture_default_str();
  bench->add_option("--dmin", b_dmin, "start:stop:step or comma list")->capture_default_str();
  bench->add_option("--cv", b_cv, "comma list")->capture_default_str();
  bench->add_option("--draws", bc.draws)->capture_default_str();
  bench->add_option("--seed", bc.seed)->capture_default_str();
  bench->add_option("--threads", bc.threads)->capture_default_str();
  bench->add_option("--rcm-ref", bc.rcm_reference);
  bench->add_option("--quad-nodes", b_nodes)->capture_default_str();
  bench->add_option("--out", b_out, "output directory")->capture_default_str();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*routes) {
      const Fixture fx = fixture_of(rc);
      const ChoiceSet cs = mode == "efficient"
                               ? enumerate_efficient_routes(fx.network, fx.od)
                               : sample_choice_set(fx.network, fx.od, route_draws, route_cv, route_seed);
      with_output(rc.out, [&](std::ostream& o) { write_choice_set_csv(o, cs); });
    } else if (*probs) {
      const Fixture fx = fixture_of(pc);
      const ChoiceSet cs = enumerate_efficient_routes(fx.network, fx.od);
      if (cs.size() == 0) throw ValidationError("no efficient route for this od pair");
      if (!(pf.cv > 0.0)) throw ValidationError("cv must be positive");
      if (is_mnp(pf.model)) {
        if (draws < 1) throw ValidationError("draws must be at least 1");
        const MnpResult r = simulate_mnp_probabilities(
            fx.network, cs, {xi_from_cv(pf.cv, cs.min_impedance()), draws, seed, threads});
        with_output(pc.out, [&](std::ostream& o) {
          o << "route_index,probability,std_error\n";
          for (std::size_t k = 0; k < cs.size(); ++k)
            o << k << ',' << r.probabilities[k] << ',' << r.std_errors[k] << '\n';
        });
      } else {
        const ModelKind m = parse_model(pf.model);
        std::vector<double> p;
        if (m == ModelKind::Conl)
          p = conl_probabilities(build_conl(fx.network, cs, weight_formula_from_int(pf.weights), pf.dmin,
                                            theta0_from_cv(pf.cv, cs.min_impedance()), pf.gamma),
                                 cs.impedances());
        else
          p = model_probabilities(m, fx.network, cs, pf.cv, pf.dmin, weight_formula_from_int(pf.weights));
        with_output(pc.out, [&](std::ostream& o) {
          o << "route_index,probability\n";
          for (std::size_t k = 0; k < cs.size(); ++k) o << k << ',' << p[k] << '\n';
        });
      }
    } else if (*corr) {
      const Fixture fx = fixture_of(cc);
      const ChoiceSet cs = enumerate_efficient_routes(fx.network, fx.od);
      if (cs.size() < 2) throw ValidationError("correlations need at least two routes");
      QuadratureSpec q;
      q.nodes = quad_nodes;
      Eigen::MatrixXd fcm, cov;
      if (is_mnp(cf.model)) {
        cov = overlap_matrix(fx.network, cs);
        fcm = ds_moments(fx.network, cs, 1.0).corr;
      } else {
        fcm = model_fcm(parse_model(cf.model), fx.network, cs, cf.dmin, weight_formula_from_int(cf.weights), q);
        cov = fcm;
      }
      Eigen::MatrixXd out = fcm;
      std::vector<std::size_t> index(cs.size());
      for (std::size_t k = 0; k < index.size(); ++k) index[k] = k;
      if (space == "rcm") {
        const std::size_t ref = rcm_ref ? *rcm_ref : anchored_rcm_reference(overlap_matrix(fx.network, cs));
        if (ref >= cs.size()) throw ValidationError("rcm reference out of range");
        out = reduce_to_rcm(cov, ref);
        index.erase(index.begin() + static_cast<long>(ref));
      }
      with_output(cc.out, [&](std::ostream& o) {
        o << "row_index,col_index,value\n";
        for (long i = 0; i < out.rows(); ++i)
          for (long j = 0; j < out.cols(); ++j) o << index[i] << ',' << index[j] << ',' << out(i, j) << '\n';
      });
    } else if (*structure) {
      const Fixture fx = fixture_of(sc);
      const ChoiceSet cs = enumerate_efficient_routes(fx.network, fx.od);
      if (cs.size() == 0) throw ValidationError("no efficient route for this od pair");
      if (!(s_cv > 0.0)) throw ValidationError("cv must be positive");
      const ConlStructure s = build_conl(fx.network, cs, weight_formula_from_int(s_weights), s_dmin,
                                         theta0_from_cv(s_cv, cs.min_impedance()), s_gamma);
      const ConlCorrelation cr = conl_fcm(s);
      with_output(sc.out, [&](std::ostream& o) {
        o << "record,component,link,routes,value,clamped\n";
        for (std::size_t i = 0; i < s.components.size(); ++i) {
          for (const auto& n : s.components[i].nests)
            o << "nest," << i << ',' << (n.link ? std::to_string(*n.link) : "") << ',' << join_routes(n.routes)
              << ",,\n";
          o << "weight," << i << ",,," << s.weights[i] << ",\n";
        }
        for (std::size_t l = 0; l < s.shared.size(); ++l)
          o << "delta,," << s.shared[l].link << ',' << join_routes(s.shared[l].routes) << ',' << s.deltas[l]
            << ',' << (cr.clamped[l] ? 1 : 0) << '\n';
        for (std::size_t l = 0; l < s.shared.size(); ++l)
          o << "residual,," << s.shared[l].link << ",," << cr.residuals[l] << ',' << (cr.clamped[l] ? 1 : 0)
            << '\n';
      });
    } else if (*bench) {
      if (!b_od.empty()) bc.od = parse_od(b_od);
      bc.models = parse_model_list(b_models);
      bc.weights = weight_formula_from_int(b_weights);
      bc.delta_min = parse_grid(b_dmin);
      bc.cv = parse_grid(b_cv);
      bc.quadrature.nodes = b_nodes;
      const MseReport rep = run_grid(bc);
      for (const auto& p : emit_outputs(rep, b_out)) std::cerr << "wrote " << p.string() << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
