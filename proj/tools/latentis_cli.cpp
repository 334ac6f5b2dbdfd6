// Command-line front end: fit / detect / predict / eval / gen over CSV data.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latentis/dataio.hpp"
#include "latentis/deep_pls.hpp"
#include "latentis/fa.hpp"
#include "latentis/gmm.hpp"
#include "latentis/hmm.hpp"
#include "latentis/monitoring.hpp"
#include "latentis/rng.hpp"
#include "latentis/serialize.hpp"
#include "latentis/synth.hpp"

namespace {

using latentis::Index;
using latentis::Matrix;
using latentis::Vector;
using nlohmann::json;

struct RunConfig {
  std::string input, target, output, model_path, truth, pred;
  std::string model_kind, gen_kind, mapping = "identity", task = "regression";
  std::string algorithm = "svd";
  int k = 2, depth = 3, n = 500, m = 10, latent = 2, length = 100, sequences = 20;
  int window = 10, ica_cap = 8, map_dim = 32, symbols = 0, onset = -1;
  long long plant_seed = -1;
  double delta = 0.01, mu = 1.0, eta = 0.01, cpv = 0.90;
  double noise = 0.1, shift = 3.0, varfactor = 1.0, separation = 5.0;
  std::vector<int> affected, layer_ks, ica_ks;
  std::uint64_t seed = 0;
  bool no_scale = false, no_header = false, as_json = false;
};

void emit_report(const RunConfig& cfg, const json& report) {
  if (cfg.as_json) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  for (auto it = report.begin(); it != report.end(); ++it) {
    std::cout << it.key() << ": ";
    if (it->is_string())
      std::cout << it->get<std::string>();
    else
      std::cout << it->dump();
    std::cout << '\n';
  }
}

json tail(const std::vector<double>& trace, std::size_t count = 5) {
  json j = json::array();
  const std::size_t start = trace.size() > count ? trace.size() - count : 0;
  for (std::size_t i = start; i < trace.size(); ++i) j.push_back(trace[i]);
  return j;
}

latentis::Dataset read_input(const std::string& path, bool no_header) {
  return latentis::load_csv(path, !no_header);
}

std::vector<std::vector<int>> to_sequences(const Matrix& values) {
  std::vector<std::vector<int>> seqs;
  for (Index i = 0; i < values.rows(); ++i) {
    std::vector<int> seq;
    for (Index j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      const int sym = static_cast<int>(std::lround(v));
      if (std::abs(v - sym) > 1e-9)
        throw std::invalid_argument("hmm input must contain integer symbols");
      seq.push_back(sym);
    }
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

struct OneHot {
  Matrix Y;
  std::vector<double> labels;
};

OneHot one_hot(const Matrix& column) {
  if (column.cols() != 1)
    throw std::invalid_argument("classification target must be a single label column");
  std::set<double> uniq;
  for (Index i = 0; i < column.rows(); ++i) uniq.insert(column(i, 0));
  std::vector<double> labels(uniq.begin(), uniq.end());
  Matrix Y = Matrix::Zero(column.rows(), static_cast<Index>(labels.size()));
  for (Index i = 0; i < column.rows(); ++i) {
    const auto pos = std::lower_bound(labels.begin(), labels.end(), column(i, 0));
    Y(i, static_cast<Index>(pos - labels.begin())) = 1.0;
  }
  return {std::move(Y), std::move(labels)};
}

latentis::MappingSpec parse_mapping(const RunConfig& cfg) {
  latentis::MappingSpec spec;
  spec.output_dim = cfg.map_dim;
  spec.seed = cfg.seed;
  if (cfg.mapping == "identity") spec.kind = latentis::MappingKind::identity;
  else if (cfg.mapping == "tanh") spec.kind = latentis::MappingKind::tanh_expand;
  else if (cfg.mapping == "fourier") spec.kind = latentis::MappingKind::random_fourier;
  else if (cfg.mapping == "poly2") spec.kind = latentis::MappingKind::polynomial2;
  else throw std::invalid_argument("unknown mapping '" + cfg.mapping + "'");
  return spec;
}

int cmd_fit(const RunConfig& cfg) {
  latentis::Dataset data = read_input(cfg.input, cfg.no_header);
  std::optional<latentis::Scaler> scaler;
  Matrix X = data.values;
  if (!cfg.no_scale && cfg.model_kind != "hmm") {
    scaler = latentis::fit_scaler(X);
    X = scaler->apply(X);
  }

  json report;
  report["kind"] = cfg.model_kind;
  report["samples"] = data.n();
  report["variables"] = data.m();
  latentis::ModelFile file{latentis::PcaModel{}, scaler};

  if (cfg.model_kind == "pca") {
    auto model = latentis::fit_pca(X, cfg.k);
    json ev = json::array();
    for (int j = 0; j < model.k; ++j) ev.push_back(model.eigenvalues(j));
    report["components"] = model.k;
    report["eigenvalues"] = ev;
    file.model = std::move(model);
  } else if (cfg.model_kind == "fa") {
    auto model = latentis::fit_fa(X, cfg.k);
    report["factors"] = model.k;
    report["converged"] = model.converged;
    report["loglik_tail"] = tail(model.loglik_trace);
    file.model = std::move(model);
  } else if (cfg.model_kind == "ica") {
    latentis::IcaOptions opts;
    opts.seed = cfg.seed;
    auto model = latentis::fit_ica(X.transpose(), cfg.k, opts);
    report["sources"] = model.k;
    report["converged"] = model.converged;
    file.model = std::move(model);
  } else if (cfg.model_kind == "gmm") {
    latentis::GmmOptions opts;
    opts.seed = cfg.seed;
    auto model = latentis::fit_gmm(X, cfg.k, opts);
    report["components"] = model.k;
    report["converged"] = model.converged;
    report["loglik_tail"] = tail(model.loglik_trace);
    file.model = std::move(model);
  } else if (cfg.model_kind == "hmm") {
    auto seqs = to_sequences(data.values);
    int symbols = cfg.symbols;
    if (symbols <= 0) {
      for (const auto& s : seqs)
        for (int v : s) symbols = std::max(symbols, v + 1);
    }
    latentis::BaumWelchOptions opts;
    opts.seed = cfg.seed;
    auto model = latentis::hmm_baum_welch(seqs, cfg.k, symbols, opts);
    report["states"] = model.state_count;
    report["symbols"] = model.symbol_count;
    report["converged"] = model.converged;
    report["loglik_tail"] = tail(model.loglik_trace);
    file.model = std::move(model);
  } else if (cfg.model_kind == "cca" || cfg.model_kind == "pls") {
    if (cfg.target.empty()) throw std::invalid_argument(cfg.model_kind + " needs --target");
    latentis::Dataset target = read_input(cfg.target, cfg.no_header);
    if (target.n() != data.n()) throw std::invalid_argument("target row count differs from input");
    if (cfg.model_kind == "cca") {
      auto model = latentis::fit_cca(X, target.values, cfg.k);
      json corr = json::array();
      for (int j = 0; j < model.k; ++j) corr.push_back(model.correlations(j));
      report["correlations"] = corr;
      file.model = std::move(model);
    } else {
      latentis::PlsOptions opts;
      opts.algorithm = cfg.algorithm == "nipals" ? latentis::PlsAlgorithm::nipals
                                                 : latentis::PlsAlgorithm::svd;
      auto model = latentis::fit_pls(X, target.values, cfg.k, opts);
      json sv = json::array();
      for (int j = 0; j < model.components; ++j) sv.push_back(model.singular_values(j));
      report["components"] = model.components;
      report["singular_values"] = sv;
      if (model.zero_cross) report["warning"] = "cross-covariance vanished before k components";
      file.model = std::move(model);
    }
  } else if (cfg.model_kind == "dpi") {
    latentis::DpiOptions opts;
    opts.depth = cfg.depth;
    opts.cpv = cfg.cpv;
    opts.ica_cap = cfg.ica_cap;
    opts.ica_ks = cfg.ica_ks;
    opts.seed = cfg.seed;
    opts.params = latentis::FusionParams{cfg.mu, cfg.delta, cfg.eta, cfg.window};
    auto model = latentis::build_dpi(X, opts);
    json dims = json::array();
    json limits = json::array();
    for (int l = 0; l < model.depth; ++l) {
      dims.push_back({{"layer", l + 1},
                      {"pca", model.pca_layers[static_cast<std::size_t>(l)].k},
                      {"ica", model.ica_layers[static_cast<std::size_t>(l)].k}});
      for (int kind = 0; kind < latentis::kStatKinds; ++kind) {
        const auto& cl =
            model.limits[static_cast<std::size_t>(l)][static_cast<std::size_t>(kind)];
        limits.push_back(
            {{"layer", l + 1},
             {"statistic", latentis::stat_kind_name(static_cast<latentis::StatKind>(kind))},
             {"limit", cl.limit}});
      }
    }
    report["depth"] = model.depth;
    report["layer_dimensions"] = dims;
    report["control_limits"] = limits;
    file.model = std::move(model);
  } else if (cfg.model_kind == "dpls" || cfg.model_kind == "gdpls") {
    if (cfg.target.empty()) throw std::invalid_argument(cfg.model_kind + " needs --target");
    latentis::Dataset target = read_input(cfg.target, cfg.no_header);
    if (target.n() != data.n()) throw std::invalid_argument("target row count differs from input");
    const bool classify = cfg.task == "classification";
    Matrix Y = target.values;
    std::vector<double> labels;
    if (classify) {
      OneHot oh = one_hot(target.values);
      Y = std::move(oh.Y);
      labels = std::move(oh.labels);
    }
    const auto task = classify ? latentis::Task::classification : latentis::Task::regression;
    const std::vector<int> ks = cfg.layer_ks.empty() ? std::vector<int>{cfg.k} : cfg.layer_ks;
    json profile = json::array();
    if (cfg.model_kind == "dpls") {
      auto model = latentis::fit_dpls(X, Y, cfg.depth, ks, task, labels);
      for (double c : latentis::covariance_profile(model, X, Y)) profile.push_back(c);
      file.model = std::move(model);
    } else {
      auto model = latentis::fit_gdpls(X, Y, cfg.depth, {parse_mapping(cfg)}, ks, task, labels);
      for (double c : latentis::covariance_profile(model, X, Y)) profile.push_back(c);
      file.model = std::move(model);
    }
    report["depth"] = cfg.depth;
    report["task"] = cfg.task;
    report["covariance_profile"] = profile;
  } else {
    throw std::invalid_argument("unknown model kind '" + cfg.model_kind + "'");
  }

  latentis::save_model(file, cfg.output);
  report["model_file"] = cfg.output;
  emit_report(cfg, report);
  return 0;
}

int cmd_detect(const RunConfig& cfg) {
  latentis::ModelFile file = latentis::load_model(cfg.model_path);
  if (!std::holds_alternative<latentis::DeepDetector>(file.model))
    throw latentis::KindError("detect needs a dpi model, file holds '" +
                              latentis::model_kind(file.model) + "'");
  const auto& det = std::get<latentis::DeepDetector>(file.model);

  latentis::Dataset data = read_input(cfg.input, cfg.no_header);
  Matrix X = file.scaler ? file.scaler->apply(data.values) : data.values;
  if (X.cols() != det.pca_layers[0].loadings_p.rows())
    throw std::invalid_argument("test data dimension does not match the detector");

  latentis::DetectorState state;
  std::ostringstream out;
  out << "index,dbs_t2,dbs_qt,dbs_i2,dbs_qi,odbs,is_fault\n";
  Index faults = 0;
  for (Index i = 0; i < X.rows(); ++i) {
    auto rec = latentis::detect(det, X.row(i).transpose(), state);
    out << i;
    for (int kind = 0; kind < latentis::kStatKinds; ++kind)
      out << ',' << latentis::format_double(rec.dbs[static_cast<std::size_t>(kind)]);
    out << ',' << latentis::format_double(rec.odbs) << ',' << (rec.is_fault ? 1 : 0) << '\n';
    if (rec.is_fault) ++faults;
  }
  std::ofstream f(cfg.output, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write output file: " + cfg.output);
  f << out.str();

  json report;
  report["samples"] = X.rows();
  report["faults_flagged"] = faults;
  report["fault_fraction"] = static_cast<double>(faults) / static_cast<double>(X.rows());
  report["output"] = cfg.output;
  emit_report(cfg, report);
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  latentis::ModelFile file = latentis::load_model(cfg.model_path);
  latentis::Dataset data = read_input(cfg.input, cfg.no_header);
  Matrix X = file.scaler ? file.scaler->apply(data.values) : data.values;

  Matrix predictions;
  std::vector<std::string> names;
  const auto labels_to_column = [&](const std::vector<double>& labels) {
    predictions = Matrix(static_cast<Index>(labels.size()), 1);
    for (std::size_t i = 0; i < labels.size(); ++i)
      predictions(static_cast<Index>(i), 0) = labels[i];
    names = {"label"};
  };

  if (auto* pls = std::get_if<latentis::PlsModel>(&file.model)) {
    predictions = latentis::pls_predict(*pls, X);
  } else if (auto* dpls = std::get_if<latentis::DplsModel>(&file.model)) {
    if (dpls->task == latentis::Task::classification)
      labels_to_column(latentis::dpls_predict_labels(*dpls, X));
    else
      predictions = latentis::dpls_predict(*dpls, X);
  } else if (auto* gdpls = std::get_if<latentis::GdplsModel>(&file.model)) {
    if (gdpls->task == latentis::Task::classification)
      labels_to_column(latentis::gdpls_predict_labels(*gdpls, X));
    else
      predictions = latentis::gdpls_predict(*gdpls, X);
  } else {
    throw latentis::KindError("predict needs a pls, dpls or gdpls model, file holds '" +
                              latentis::model_kind(file.model) + "'");
  }
  if (names.empty())
    for (Index j = 0; j < predictions.cols(); ++j) names.push_back("y" + std::to_string(j + 1));
  latentis::write_csv(cfg.output, predictions, names);

  json report;
  report["rows"] = predictions.rows();
  report["output"] = cfg.output;
  emit_report(cfg, report);
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  latentis::Dataset pred = read_input(cfg.pred, cfg.no_header);
  latentis::Dataset truth = read_input(cfg.truth, cfg.no_header);
  if (pred.n() != truth.n())
    throw std::invalid_argument("prediction and truth row counts differ");

  json report;
  report["task"] = cfg.task;
  if (cfg.task == "regression") {
    if (pred.m() != truth.m())
      throw std::invalid_argument("prediction and truth column counts differ");
    const Matrix diff = pred.values - truth.values;
    const double rmse = std::sqrt(diff.array().square().mean());
    const double ss_res = diff.array().square().sum();
    const Matrix centered = truth.values.rowwise() - truth.values.colwise().mean();
    const double ss_tot = centered.array().square().sum();
    report["rmse"] = rmse;
    report["r2"] = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  } else if (cfg.task == "classification") {
    Index correct = 0;
    for (Index i = 0; i < pred.n(); ++i)
      if (pred.values(i, 0) == truth.values(i, 0)) ++correct;
    report["accuracy"] = static_cast<double>(correct) / static_cast<double>(pred.n());
  } else if (cfg.task == "monitoring") {
    // Predictions come from `detect` output (is_fault column); truth is a 0/1 mask.
    Index flag_col = pred.m() - 1;
    for (std::size_t j = 0; j < pred.names.size(); ++j)
      if (pred.names[j] == "is_fault") flag_col = static_cast<Index>(j);
    Index tp = 0, fp = 0, pos = 0, neg = 0;
    for (Index i = 0; i < pred.n(); ++i) {
      const bool flagged = pred.values(i, flag_col) != 0;
      const bool faulty = truth.values(i, 0) != 0;
      if (faulty) {
        ++pos;
        if (flagged) ++tp;
      } else {
        ++neg;
        if (flagged) ++fp;
      }
    }
    report["detection_rate"] = pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0;
    report["false_alarm_rate"] = neg > 0 ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
  } else {
    throw std::invalid_argument("unknown eval task '" + cfg.task + "'");
  }
  emit_report(cfg, report);
  return 0;
}

int cmd_gen(const RunConfig& cfg) {
  // Model parameters come from their own stream so fixtures can share a plant
  // (--plant-seed) while varying the sampled noise (--seed).
  const std::uint64_t param_seed =
      cfg.plant_seed >= 0 ? static_cast<std::uint64_t>(cfg.plant_seed) : cfg.seed;
  latentis::Rng init(param_seed ^ 0xa5a5a5a5a5a5a5a5ull);
  json report;
  report["kind"] = cfg.gen_kind;
  report["seed"] = cfg.seed;

  if (cfg.gen_kind == "linear_gaussian" || cfg.gen_kind == "process_fault") {
    latentis::LinearGaussianSpec plant;
    plant.W = Matrix(cfg.m, cfg.latent);
    for (Index i = 0; i < plant.W.rows(); ++i)
      for (Index j = 0; j < plant.W.cols(); ++j) plant.W(i, j) = init.gaussian();
    plant.mu = Vector::Zero(cfg.m);
    plant.psi = Vector::Constant(cfg.m, cfg.noise);
    plant.n = cfg.n;
    plant.seed = cfg.seed;

    if (cfg.gen_kind == "linear_gaussian") {
      auto sample = latentis::gen_linear_gaussian(plant);
      latentis::write_csv(cfg.output, sample.data.values, sample.data.names);
      if (!cfg.truth.empty()) {
        std::vector<std::string> names;
        for (Index j = 0; j < sample.latents.cols(); ++j)
          names.push_back("t" + std::to_string(j + 1));
        latentis::write_csv(cfg.truth, sample.latents, names);
      }
      report["rows"] = sample.data.n();
    } else {
      latentis::FaultSpec spec;
      spec.plant = plant;
      spec.onset = cfg.onset >= 0 ? cfg.onset : cfg.n / 2;
      if (cfg.affected.empty()) {
        for (int j = 0; j < std::min(cfg.m, 5); ++j) spec.affected.push_back(j);
      } else {
        for (int j : cfg.affected) spec.affected.push_back(j);
      }
      spec.shift_sigmas = cfg.shift;
      spec.variance_factor = cfg.varfactor;
      auto sample = latentis::gen_process_with_fault(spec);
      latentis::write_csv(cfg.output, sample.data.values, sample.data.names);
      if (!cfg.truth.empty()) {
        Matrix mask(static_cast<Index>(sample.mask.size()), 1);
        for (std::size_t i = 0; i < sample.mask.size(); ++i)
          mask(static_cast<Index>(i), 0) = sample.mask[i] ? 1.0 : 0.0;
        latentis::write_csv(cfg.truth, mask, {"fault"});
      }
      report["rows"] = sample.data.n();
      report["onset"] = spec.onset;
    }
  } else if (cfg.gen_kind == "gmm") {
    latentis::MixtureSpec spec;
    for (int c = 0; c < cfg.k; ++c) {
      spec.weights.push_back(1.0 / cfg.k);
      Vector mean(cfg.m);
      for (Index j = 0; j < cfg.m; ++j) mean(j) = init.gaussian() * cfg.separation;
      spec.means.push_back(mean);
      spec.covariances.push_back(Matrix::Identity(cfg.m, cfg.m));
    }
    spec.n = cfg.n;
    spec.seed = cfg.seed;
    auto sample = latentis::gen_gmm(spec);
    latentis::write_csv(cfg.output, sample.data.values, sample.data.names);
    if (!cfg.truth.empty()) {
      Matrix labels(static_cast<Index>(sample.labels.size()), 1);
      for (std::size_t i = 0; i < sample.labels.size(); ++i)
        labels(static_cast<Index>(i), 0) = sample.labels[i];
      latentis::write_csv(cfg.truth, labels, {"component"});
    }
    report["rows"] = sample.data.n();
  } else if (cfg.gen_kind == "hmm") {
    latentis::HmmModel hmm;
    hmm.state_count = cfg.k;
    const int symbols = cfg.symbols > 0 ? cfg.symbols : cfg.m;
    hmm.symbol_count = symbols;
    hmm.transition = Matrix::Constant(cfg.k, cfg.k, cfg.k > 1 ? 0.1 / (cfg.k - 1) : 0.0);
    hmm.transition.diagonal().setConstant(cfg.k > 1 ? 0.9 : 1.0);
    hmm.emission = Matrix(cfg.k, symbols);
    for (int i = 0; i < cfg.k; ++i) {
      double total = 0.0;
      for (int j = 0; j < symbols; ++j) {
        hmm.emission(i, j) = 0.05 + init.uniform();
        total += hmm.emission(i, j);
      }
      hmm.emission.row(i) /= total;
    }
    hmm.initial = Vector::Constant(cfg.k, 1.0 / cfg.k);
    latentis::HmmGenSpec spec{hmm, cfg.sequences, cfg.length, cfg.seed};
    auto sample = latentis::gen_hmm(spec);
    Matrix obs(cfg.sequences, cfg.length);
    Matrix states(cfg.sequences, cfg.length);
    for (int s = 0; s < cfg.sequences; ++s)
      for (int t = 0; t < cfg.length; ++t) {
        obs(s, t) = sample.observations[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
        states(s, t) = sample.states[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
      }
    std::vector<std::string> names;
    for (int t = 0; t < cfg.length; ++t) names.push_back("o" + std::to_string(t + 1));
    latentis::write_csv(cfg.output, obs, names);
    if (!cfg.truth.empty()) {
      std::vector<std::string> snames;
      for (int t = 0; t < cfg.length; ++t) snames.push_back("s" + std::to_string(t + 1));
      latentis::write_csv(cfg.truth, states, snames);
    }
    report["sequences"] = cfg.sequences;
    report["length"] = cfg.length;
  } else {
    throw std::invalid_argument("unknown generator kind '" + cfg.gen_kind + "'");
  }

  report["output"] = cfg.output;
  emit_report(cfg, report);
  return 0;
}

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_flag("--json", cfg.as_json, "machine-readable report on stdout");
  cmd->add_flag("--no-header", cfg.no_header, "input CSV files have no header row");
  cmd->add_option("--seed", cfg.seed, "random seed (default 0)");
  cmd->add_option("--config", config_path, "JSON file supplying the same keys; flags win");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latentis: latent-variable models for monitoring and prediction"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunConfig cfg;
  std::string config_path;

  auto* fit = app.add_subcommand("fit", "fit a model on CSV data");
  fit->add_option("--model", cfg.model_kind, "fa|pca|ica|cca|pls|gmm|hmm|dpi|dpls|gdpls")
      ->required();
  fit->add_option("--input", cfg.input, "training CSV")->required();
  fit->add_option("--target", cfg.target, "target CSV (cca, pls, dpls, gdpls)");
  fit->add_option("--output", cfg.output, "model file to write")->required();
  fit->add_option("--k", cfg.k, "components / factors / sources / states");
  fit->add_option("--layer-ks", cfg.layer_ks, "per-layer components, e.g. 4,3,2 (dpls, gdpls)")
      ->delimiter(',');
  fit->add_option("--depth", cfg.depth, "layer count (dpi, dpls, gdpls)");
  fit->add_option("--cpv", cfg.cpv, "cumulative variance retention per layer (dpi)");
  fit->add_option("--ica-cap", cfg.ica_cap, "max sources per layer (dpi)");
  fit->add_option("--ica-ks", cfg.ica_ks, "per-layer source counts, e.g. 6,4,2 (dpi)")
      ->delimiter(',');
  fit->add_option("--delta", cfg.delta, "significance level / fault prior");
  fit->add_option("--mu", cfg.mu, "posterior adjustment");
  fit->add_option("--eta", cfg.eta, "disagreement down-weight");
  fit->add_option("--window", cfg.window, "posterior smoothing window");
  fit->add_option("--mapping", cfg.mapping, "identity|tanh|fourier|poly2 (gdpls)");
  fit->add_option("--map-dim", cfg.map_dim, "mapped width (tanh / fourier)");
  fit->add_option("--task", cfg.task, "regression|classification (dpls, gdpls)");
  fit->add_option("--algorithm", cfg.algorithm, "svd|nipals (pls)");
  fit->add_option("--symbols", cfg.symbols, "symbol count (hmm; default max+1)");
  fit->add_flag("--no-scale", cfg.no_scale, "skip standardization of the input");
  add_common(fit, cfg, config_path);

  auto* detect = app.add_subcommand("detect", "score samples with a dpi detector");
  detect->add_option("--model", cfg.model_path, "dpi model file")->required();
  detect->add_option("--input", cfg.input, "test CSV")->required();
  detect->add_option("--output", cfg.output, "detection records CSV")->required();
  add_common(detect, cfg, config_path);

  auto* predict = app.add_subcommand("predict", "predict with a pls/dpls/gdpls model");
  predict->add_option("--model", cfg.model_path, "model file")->required();
  predict->add_option("--input", cfg.input, "feature CSV")->required();
  predict->add_option("--output", cfg.output, "prediction CSV")->required();
  add_common(predict, cfg, config_path);

  auto* eval = app.add_subcommand("eval", "score predictions against truth");
  eval->add_option("--task", cfg.task, "regression|classification|monitoring")->required();
  eval->add_option("--pred", cfg.pred, "prediction CSV")->required();
  eval->add_option("--truth", cfg.truth, "ground-truth CSV")->required();
  add_common(eval, cfg, config_path);

  auto* gen = app.add_subcommand("gen", "materialize synthetic fixtures");
  gen->add_option("--kind", cfg.gen_kind, "linear_gaussian|gmm|hmm|process_fault")->required();
  gen->add_option("--output", cfg.output, "data CSV to write")->required();
  gen->add_option("--truth", cfg.truth, "optional ground-truth CSV");
  gen->add_option("--n", cfg.n, "sample count");
  gen->add_option("--m", cfg.m, "variable count");
  gen->add_option("--k", cfg.k, "mixture components / hmm states");
  gen->add_option("--latent", cfg.latent, "latent dimension of the plant");
  gen->add_option("--noise", cfg.noise, "observation noise variance");
  gen->add_option("--separation", cfg.separation, "mixture mean spread");
  gen->add_option("--sequences", cfg.sequences, "hmm sequence count");
  gen->add_option("--length", cfg.length, "hmm sequence length");
  gen->add_option("--symbols", cfg.symbols, "hmm symbol count (default --m)");
  gen->add_option("--onset", cfg.onset, "fault onset row (default n/2)");
  gen->add_option("--plant-seed", cfg.plant_seed,
                  "separate seed for the model parameters (default: --seed)");
  gen->add_option("--affected", cfg.affected, "fault-affected column indices");
  gen->add_option("--shift", cfg.shift, "fault shift in nominal sigmas");
  gen->add_option("--varfactor", cfg.varfactor, "fault variance inflation");
  add_common(gen, cfg, config_path);

  // An optional JSON config supplies the same keys; explicit flags win because
  // config-derived arguments are injected right after the subcommand name and
  // every option takes its last occurrence.
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] != "--config") continue;
    std::ifstream in(args[i + 1]);
    if (!in) {
      std::cerr << "error: cannot open config file " << args[i + 1] << '\n';
      return 2;
    }
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      std::cerr << "error: invalid JSON config: " << e.what() << '\n';
      return 2;
    }
    std::vector<std::string> injected;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it->is_boolean()) {
        if (it->get<bool>()) injected.push_back("--" + it.key());
        continue;
      }
      injected.push_back("--" + it.key());
      injected.push_back(it->is_string() ? it->get<std::string>() : it->dump());
    }
    if (!args.empty())
      args.insert(args.begin() + 1, injected.begin(), injected.end());
    break;
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for usage.\n";
    return 2;
  }

  try {
    if (app.got_subcommand("fit")) return cmd_fit(cfg);
    if (app.got_subcommand("detect")) return cmd_detect(cfg);
    if (app.got_subcommand("predict")) return cmd_predict(cfg);
    if (app.got_subcommand("eval")) return cmd_eval(cfg);
    if (app.got_subcommand("gen")) return cmd_gen(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
