#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "routecorr/conl.hpp"
#include "routecorr/gevcov.hpp"
#include "routecorr/mnp.hpp"
#include "routecorr/netgraph.hpp"

namespace routecorr {

enum class ModelKind { Mnl, LnlConst, LnlArith, LnlGeom, Pcl, Conl };

ModelKind parse_model(std::string_view name);
std::string model_name(ModelKind m);
std::vector<ModelKind> parse_model_list(std::string_view csv);

enum class CorrSpace { Fcm, Rcm };

/// mean squared difference over routes, x 1e4
double mse_probabilities(std::span<const double> p_model, std::span<const double> p_target);
/// Delta-method standard error of mse_probabilities when p_target is a
/// Monte-Carlo frequency vector from n_draws multinomial draws.
double mse_probabilities_stderr(std::span<const double> p_model, std::span<const double> p_target,
                                std::uint64_t n_draws);
/// mean squared difference over all entries, x 1e3
double mse_correlations(const Eigen::MatrixXd& r_model, const Eigen::MatrixXd& r_target, CorrSpace space);

/// Choice probabilities of a closed-form model at the given cv.
std::vector<double> model_probabilities(ModelKind m, const Network& net, const ChoiceSet& cs, double cv,
                                        double delta_min, WeightFormula weights = WeightFormula::MeanSplit);
/// Full correlation matrix of a closed-form model; independent of cv.
Eigen::MatrixXd model_fcm(ModelKind m, const Network& net, const ChoiceSet& cs, double delta_min,
                          WeightFormula weights = WeightFormula::MeanSplit, const QuadratureSpec& q = {});

struct ExperimentConfig {
  std::string network = "mesh2x2";
  std::optional<OdPair> od;
  std::vector<ModelKind> models{ModelKind::Mnl,     ModelKind::LnlConst, ModelKind::LnlArith,
                                ModelKind::LnlGeom, ModelKind::Pcl,      ModelKind::Conl};
  WeightFormula weights = WeightFormula::MeanSplit;
  double gamma = 1.0;
  std::vector<double> delta_min{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> cv{0.1, 0.2};
  std::uint64_t draws = 1'000'000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::optional<std::size_t> rcm_reference;
  QuadratureSpec quadrature;
};

void validate(const ExperimentConfig& cfg);

struct MseRow {
  ModelKind model;
  std::string variant;
  double delta_min;
  double cv;
  double prob_mse_x1e4;
  double fcm_mse_x1e3;
  double rcm_mse_x1e3;
  double prob_mse_se;  // propagated Monte-Carlo standard error
};

struct MnpTarget {
  double cv;
  double xi;
  std::uint64_t draws;
  std::vector<double> probabilities;
  std::vector<double> std_errors;
};

struct MseReport {
  std::string network;
  OdPair od{};
  ChoiceSet choice_set;
  std::size_t rcm_reference = 0;
  std::vector<MnpTarget> mnp;
  std::vector<MseRow> rows;  // ordered by (model, delta_min, cv)
};

/// Resolves the network, enumerates efficient routes and runs the grid.
MseReport run_grid(const ExperimentConfig& cfg);
MseReport run_grid(const Network& net, const ChoiceSet& cs, const ExperimentConfig& cfg);

/// Writes table.csv, mnp_target.csv and the curve_*.csv files into dir.
std::vector<std::filesystem::path> emit_outputs(const MseReport& report, const std::filesystem::path& dir);
void write_table_csv(std::ostream& out, const MseReport& report);

/// "name", "name:key=value,key=value" for built-ins, otherwise a file path.
/// A file's first od line becomes the study pair.
Fixture resolve_network(std::string_view spec, std::optional<OdPair> od = std::nullopt);
OdPair parse_od(std::string_view text);
/// "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(std::string_view text);

}  // namespace routecorr
