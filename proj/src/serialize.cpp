#include "latentis/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace latentis {

namespace {

using nlohmann::json;

json to_json(const Matrix& m) {
  json j;
  j["r"] = m.rows();
  j["c"] = m.cols();
  auto& data = j["v"] = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  return j;
}

Matrix matrix_from(const json& j) {
  const Index r = j.at("r").get<Index>();
  const Index c = j.at("c").get<Index>();
  const auto& v = j.at("v");
  if (static_cast<Index>(v.size()) != r * c) throw ParseError("matrix payload size mismatch");
  Matrix m(r, c);
  Index idx = 0;
  for (Index i = 0; i < r; ++i)
    for (Index k = 0; k < c; ++k) m(i, k) = v[static_cast<std::size_t>(idx++)].get<double>();
  return m;
}

json to_json(const Vector& v) {
  json j = json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json scaler_to_json(const Scaler& s) {
  json j;
  j["means"] = to_json(s.means);
  j["stds"] = to_json(s.stds);
  j["constant"] = s.constant;
  return j;
}

Scaler scaler_from(const json& j) {
  Scaler s;
  s.means = vector_from(j.at("means"));
  s.stds = vector_from(j.at("stds"));
  s.constant = j.at("constant").get<std::vector<bool>>();
  return s;
}

json limit_to_json(const ControlLimit& cl) {
  return json{{"limit", cl.limit},
              {"delta", cl.delta},
              {"bandwidth", cl.bandwidth},
              {"degenerate", cl.degenerate}};
}

ControlLimit limit_from(const json& j) {
  ControlLimit cl;
  cl.limit = j.at("limit").get<double>();
  cl.delta = j.at("delta").get<double>();
  cl.bandwidth = j.at("bandwidth").get<double>();
  cl.degenerate = j.at("degenerate").get<bool>();
  return cl;
}

json params_to_json(const FusionParams& p) {
  return json{{"mu", p.mu}, {"delta", p.delta}, {"eta", p.eta}, {"window", p.window}};
}

FusionParams params_from(const json& j) {
  FusionParams p;
  p.mu = j.at("mu").get<double>();
  p.delta = j.at("delta").get<double>();
  p.eta = j.at("eta").get<double>();
  p.window = j.at("window").get<int>();
  return p;
}

json pca_to_json(const PcaModel& m) {
  json j;
  j["loadings_p"] = to_json(m.loadings_p);
  j["loadings_r"] = to_json(m.loadings_r);
  j["eigenvalues"] = to_json(m.eigenvalues);
  j["k"] = m.k;
  return j;
}

PcaModel pca_from(const json& j) {
  PcaModel m;
  m.loadings_p = matrix_from(j.at("loadings_p"));
  m.loadings_r = matrix_from(j.at("loadings_r"));
  m.eigenvalues = vector_from(j.at("eigenvalues"));
  m.k = j.at("k").get<int>();
  return m;
}

json ica_to_json(const IcaModel& m) {
  json j;
  j["whitening"] = to_json(m.whitening);
  j["mixing"] = to_json(m.mixing);
  j["separating"] = to_json(m.separating);
  j["k"] = m.k;
  j["converged"] = m.converged;
  j["ambiguous"] = m.ambiguous;
  return j;
}

IcaModel ica_from(const json& j) {
  IcaModel m;
  m.whitening = matrix_from(j.at("whitening"));
  m.mixing = matrix_from(j.at("mixing"));
  m.separating = matrix_from(j.at("separating"));
  m.k = j.at("k").get<int>();
  m.converged = j.at("converged").get<bool>();
  m.ambiguous = j.at("ambiguous").get<bool>();
  return m;
}

json pls_to_json(const PlsModel& m) {
  json j;
  j["x_weights"] = to_json(m.x_weights);
  j["y_weights"] = to_json(m.y_weights);
  j["x_scores"] = to_json(m.x_scores);
  j["y_scores"] = to_json(m.y_scores);
  j["rotation"] = to_json(m.rotation);
  j["coefficients"] = to_json(m.coefficients);
  j["singular_values"] = to_json(m.singular_values);
  j["x_means"] = to_json(m.x_means);
  j["y_means"] = to_json(m.y_means);
  j["components"] = m.components;
  j["zero_cross"] = m.zero_cross;
  return j;
}

PlsModel pls_from(const json& j) {
  PlsModel m;
  m.x_weights = matrix_from(j.at("x_weights"));
  m.y_weights = matrix_from(j.at("y_weights"));
  m.x_scores = matrix_from(j.at("x_scores"));
  m.y_scores = matrix_from(j.at("y_scores"));
  m.rotation = matrix_from(j.at("rotation"));
  m.coefficients = matrix_from(j.at("coefficients"));
  m.singular_values = vector_from(j.at("singular_values"));
  m.x_means = vector_from(j.at("x_means"));
  m.y_means = vector_from(j.at("y_means"));
  m.components = j.at("components").get<int>();
  m.zero_cross = j.at("zero_cross").get<bool>();
  return m;
}

json mapping_to_json(const MappingSpec& s) {
  return json{{"kind", static_cast<int>(s.kind)},
              {"output_dim", s.output_dim},
              {"seed", s.seed}};
}

MappingSpec mapping_from(const json& j) {
  MappingSpec s;
  const int kind = j.at("kind").get<int>();
  if (kind < 0 || kind > 3) throw ParseError("invalid mapping kind");
  s.kind = static_cast<MappingKind>(kind);
  s.output_dim = j.at("output_dim").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

json payload_of(const AnyModel& any) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        json j;
        if constexpr (std::is_same_v<T, FaModel>) {
          j["W"] = to_json(m.W);
          j["mu"] = to_json(m.mu);
          j["psi"] = to_json(m.psi);
          j["k"] = m.k;
          j["loglik_trace"] = m.loglik_trace;
          j["converged"] = m.converged;
        } else if constexpr (std::is_same_v<T, PcaModel>) {
          j = pca_to_json(m);
        } else if constexpr (std::is_same_v<T, IcaModel>) {
          j = ica_to_json(m);
        } else if constexpr (std::is_same_v<T, CcaModel>) {
          j["proj_x"] = to_json(m.proj_x);
          j["proj_y"] = to_json(m.proj_y);
          j["correlations"] = to_json(m.correlations);
          j["k"] = m.k;
        } else if constexpr (std::is_same_v<T, PlsModel>) {
          j = pls_to_json(m);
        } else if constexpr (std::is_same_v<T, GmmModel>) {
          j["weights"] = m.weights;
          auto& means = j["means"] = json::array();
          for (const auto& mu : m.means) means.push_back(to_json(mu));
          auto& covs = j["covariances"] = json::array();
          for (const auto& c : m.covariances) covs.push_back(to_json(c));
          j["k"] = m.k;
          j["loglik_trace"] = m.loglik_trace;
          j["converged"] = m.converged;
          j["reinitialized"] = m.reinitialized;
        } else if constexpr (std::is_same_v<T, HmmModel>) {
          j["transition"] = to_json(m.transition);
          j["emission"] = to_json(m.emission);
          j["initial"] = to_json(m.initial);
          j["state_count"] = m.state_count;
          j["symbol_count"] = m.symbol_count;
          j["loglik_trace"] = m.loglik_trace;
          j["converged"] = m.converged;
        } else if constexpr (std::is_same_v<T, DeepDetector>) {
          auto& pcas = j["pca_layers"] = json::array();
          for (const auto& p : m.pca_layers) pcas.push_back(pca_to_json(p));
          auto& icas = j["ica_layers"] = json::array();
          for (const auto& i : m.ica_layers) icas.push_back(ica_to_json(i));
          auto& lims = j["limits"] = json::array();
          for (const auto& per_layer : m.limits) {
            json row = json::array();
            for (const auto& cl : per_layer) row.push_back(limit_to_json(cl));
            lims.push_back(row);
          }
          j["params"] = params_to_json(m.params);
          j["depth"] = m.depth;
        } else if constexpr (std::is_same_v<T, DplsModel>) {
          auto& layers = j["layers"] = json::array();
          for (const auto& l : m.layers) layers.push_back(pls_to_json(l));
          j["layer_ks"] = m.layer_ks;
          j["head"] = to_json(m.head);
          j["task"] = m.task == Task::classification ? "classification" : "regression";
          j["y_means"] = to_json(m.y_means);
          j["class_labels"] = m.class_labels;
        } else if constexpr (std::is_same_v<T, GdplsModel>) {
          auto& maps = j["mappings"] = json::array();
          for (const auto& s : m.mappings) maps.push_back(mapping_to_json(s));
          auto& layers = j["layers"] = json::array();
          for (const auto& l : m.layers) layers.push_back(pls_to_json(l));
          j["layer_ks"] = m.layer_ks;
          j["head"] = to_json(m.head);
          j["task"] = m.task == Task::classification ? "classification" : "regression";
          j["y_means"] = to_json(m.y_means);
          j["class_labels"] = m.class_labels;
        }
        return j;
      },
      any);
}

AnyModel model_from(const std::string& kind, const json& j) {
  if (kind == "fa") {
    FaModel m;
    m.W = matrix_from(j.at("W"));
    m.mu = vector_from(j.at("mu"));
    m.psi = vector_from(j.at("psi"));
    m.k = j.at("k").get<int>();
    m.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    m.converged = j.at("converged").get<bool>();
    return m;
  }
  if (kind == "pca") return pca_from(j);
  if (kind == "ica") return ica_from(j);
  if (kind == "cca") {
    CcaModel m;
    m.proj_x = matrix_from(j.at("proj_x"));
    m.proj_y = matrix_from(j.at("proj_y"));
    m.correlations = vector_from(j.at("correlations"));
    m.k = j.at("k").get<int>();
    return m;
  }
  if (kind == "pls") return pls_from(j);
  if (kind == "gmm") {
    GmmModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& mu : j.at("means")) m.means.push_back(vector_from(mu));
    for (const auto& c : j.at("covariances")) m.covariances.push_back(matrix_from(c));
    m.k = j.at("k").get<int>();
    m.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    m.converged = j.at("converged").get<bool>();
    m.reinitialized = j.at("reinitialized").get<bool>();
    return m;
  }
  if (kind == "hmm") {
    HmmModel m;
    m.transition = matrix_from(j.at("transition"));
    m.emission = matrix_from(j.at("emission"));
    m.initial = vector_from(j.at("initial"));
    m.state_count = j.at("state_count").get<int>();
    m.symbol_count = j.at("symbol_count").get<int>();
    m.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    m.converged = j.at("converged").get<bool>();
    return m;
  }
  if (kind == "dpi") {
    DeepDetector m;
    for (const auto& p : j.at("pca_layers")) m.pca_layers.push_back(pca_from(p));
    for (const auto& i : j.at("ica_layers")) m.ica_layers.push_back(ica_from(i));
    for (const auto& row : j.at("limits")) {
      std::array<ControlLimit, kStatKinds> per_layer;
      if (row.size() != kStatKinds) throw ParseError("detector limits row size mismatch");
      for (int kidx = 0; kidx < kStatKinds; ++kidx)
        per_layer[static_cast<std::size_t>(kidx)] = limit_from(row[static_cast<std::size_t>(kidx)]);
      m.limits.push_back(per_layer);
    }
    m.params = params_from(j.at("params"));
    m.depth = j.at("depth").get<int>();
    return m;
  }
  if (kind == "dpls" || kind == "gdpls") {
    const auto read_common = [&](auto& m) {
      for (const auto& l : j.at("layers")) m.layers.push_back(pls_from(l));
      m.layer_ks = j.at("layer_ks").template get<std::vector<int>>();
      m.head = matrix_from(j.at("head"));
      m.task = j.at("task").template get<std::string>() == "classification"
                   ? Task::classification
                   : Task::regression;
      m.y_means = vector_from(j.at("y_means"));
      m.class_labels = j.at("class_labels").template get<std::vector<double>>();
    };
    if (kind == "dpls") {
      DplsModel m;
      read_common(m);
      return m;
    }
    GdplsModel m;
    for (const auto& s : j.at("mappings")) m.mappings.push_back(mapping_from(s));
    read_common(m);
    return m;
  }
  throw KindError("unknown model kind '" + kind + "'");
}

}  // namespace

std::string model_kind(const AnyModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FaModel>) return "fa";
        else if constexpr (std::is_same_v<T, PcaModel>) return "pca";
        else if constexpr (std::is_same_v<T, IcaModel>) return "ica";
        else if constexpr (std::is_same_v<T, CcaModel>) return "cca";
        else if constexpr (std::is_same_v<T, PlsModel>) return "pls";
        else if constexpr (std::is_same_v<T, GmmModel>) return "gmm";
        else if constexpr (std::is_same_v<T, HmmModel>) return "hmm";
        else if constexpr (std::is_same_v<T, DeepDetector>) return "dpi";
        else if constexpr (std::is_same_v<T, DplsModel>) return "dpls";
        else return "gdpls";
      },
      model);
}

void save_model(const ModelFile& file, const std::string& path) {
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = model_kind(file.model);
  json payload = payload_of(file.model);
  payload["scaler"] = file.scaler ? scaler_to_json(*file.scaler) : json(nullptr);
  doc["payload"] = std::move(payload);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << doc.dump(2) << '\n';
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("corrupted model file " + path + ": " + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != 1)
      throw KindError("unsupported format_version in " + path);
    const json& payload = doc.at("payload");
    ModelFile file{model_from(doc.at("kind").get<std::string>(), payload), {}};
    if (payload.contains("scaler") && !payload["scaler"].is_null())
      file.scaler = scaler_from(payload["scaler"]);
    return file;
  } catch (const json::exception& e) {
    throw ParseError("malformed model payload in " + path + ": " + e.what());
  }
}

}  // namespace latentis
