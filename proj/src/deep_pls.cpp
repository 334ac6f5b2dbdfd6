#include "latentis/deep_pls.hpp"

#include <cmath>

#include "latentis/rng.hpp"

namespace latentis {

namespace {

std::vector<int> expand_ks(const std::vector<int>& layer_ks, int depth) {
  if (layer_ks.empty()) throw std::invalid_argument("deep pls: layer_ks must not be empty");
  if (layer_ks.size() == 1) return std::vector<int>(static_cast<std::size_t>(depth), layer_ks[0]);
  if (layer_ks.size() != static_cast<std::size_t>(depth))
    throw std::invalid_argument("deep pls: layer_ks must have one entry or one per layer");
  return layer_ks;
}

PlsModel fit_layer(const Matrix& input, const Matrix& Y, int k, int layer, int /*depth*/) {
  const Index rank = Eigen::ColPivHouseholderQR<Matrix>(
                         input.rowwise() - input.colwise().mean())
                         .rank();
  if (k > rank)
    throw std::runtime_error("deep pls: rank collapsed at layer " + std::to_string(layer + 1) +
                             " (input rank " + std::to_string(rank) + " < k = " +
                             std::to_string(k) + "); achievable depth is " +
                             std::to_string(layer));
  return fit_pls(input, Y, k);
}

Matrix ols_head(const Matrix& scores, const Matrix& Yc) {
  return (scores.transpose() * scores).ldlt().solve(scores.transpose() * Yc);
}

std::vector<double> decode_labels(const Matrix& scores, const std::vector<double>& labels) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < scores.cols(); ++j)
      if (scores(i, j) > scores(i, best)) best = j;
    out.push_back(labels[static_cast<std::size_t>(best)]);
  }
  return out;
}

std::vector<double> default_labels(Index d, Task task, std::vector<double> provided) {
  if (task != Task::classification) return {};
  if (provided.empty()) {
    for (Index j = 0; j < d; ++j) provided.push_back(static_cast<double>(j));
  }
  if (provided.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("deep pls: class label count must match Y columns");
  return provided;
}

}  // namespace

DplsModel fit_dpls(const Matrix& X, const Matrix& Y, int depth,
                   const std::vector<int>& layer_ks, Task task,
                   std::vector<double> class_labels) {
  if (depth < 1) throw std::invalid_argument("fit_dpls: depth must be >= 1");
  if (X.rows() != Y.rows()) throw std::invalid_argument("fit_dpls: row counts differ");

  DplsModel model;
  model.task = task;
  model.layer_ks = expand_ks(layer_ks, depth);
  model.y_means = Y.colwise().mean();
  model.class_labels = default_labels(Y.cols(), task, std::move(class_labels));

  Matrix input = X;
  for (int l = 0; l < depth; ++l) {
    PlsModel layer = fit_layer(input, Y, model.layer_ks[static_cast<std::size_t>(l)], l, depth);
    input = layer.x_scores;
    model.layers.push_back(std::move(layer));
  }
  Matrix Yc = Y.rowwise() - model.y_means.transpose();
  model.head = ols_head(input, Yc);
  return model;
}

namespace {

Matrix propagate(const std::vector<PlsModel>& layers, const Matrix& X) {
  Matrix input = X;
  for (const auto& layer : layers) input = pls_transform(layer, input);
  return input;
}

}  // namespace

Matrix dpls_predict(const DplsModel& model, const Matrix& X) {
  Matrix top = propagate(model.layers, X);
  return (top * model.head).rowwise() + model.y_means.transpose();
}

std::vector<double> dpls_predict_labels(const DplsModel& model, const Matrix& X) {
  if (model.task != Task::classification)
    throw std::invalid_argument("dpls_predict_labels: model is not a classifier");
  return decode_labels(dpls_predict(model, X), model.class_labels);
}

namespace {

template <typename Advance>
std::vector<double> profile_impl(const std::vector<PlsModel>& layers, const Matrix& X,
                                 const Matrix& Y, Advance&& advance) {
  const double n = static_cast<double>(X.rows());
  if (Y.rows() != X.rows()) throw std::invalid_argument("covariance_profile: row counts differ");
  std::vector<double> values;
  Matrix input = X;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix mapped = advance(l, input);
    const PlsModel& layer = layers[l];
    Matrix scores = pls_transform(layer, mapped);
    Vector v1 = (Y.rowwise() - layer.y_means.transpose()) * layer.y_weights.col(0);
    values.push_back(scores.col(0).dot(v1) / n);
    input = std::move(scores);
  }
  return values;
}

}  // namespace

std::vector<double> covariance_profile(const DplsModel& model, const Matrix& X, const Matrix& Y) {
  return profile_impl(model.layers, X, Y, [](std::size_t, const Matrix& in) { return in; });
}

Matrix nonlinear_map(const MappingSpec& spec, const Matrix& X) {
  const Index n = X.rows();
  const Index m = X.cols();
  switch (spec.kind) {
    case MappingKind::identity:
      return X;
    case MappingKind::tanh_expand: {
      if (spec.output_dim < 1)
        throw std::invalid_argument("nonlinear_map: tanh_expand needs output_dim >= 1");
      Rng rng(spec.seed);
      Matrix R(m, spec.output_dim);
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < spec.output_dim; ++j) R(i, j) = rng.gaussian() * scale;
      return (X * R).array().tanh();
    }
    case MappingKind::random_fourier: {
      if (spec.output_dim < 1)
        throw std::invalid_argument("nonlinear_map: random_fourier needs output_dim >= 1");
      Rng rng(spec.seed);
      Matrix omega(m, spec.output_dim);
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < spec.output_dim; ++j) omega(i, j) = rng.gaussian() * scale;
      Vector phase(spec.output_dim);
      for (Index j = 0; j < spec.output_dim; ++j) phase(j) = 2.0 * M_PI * rng.uniform();
      Matrix H = (X * omega).rowwise() + phase.transpose();
      return std::sqrt(2.0 / static_cast<double>(spec.output_dim)) * H.array().cos();
    }
    case MappingKind::polynomial2: {
      const Index s = m + m * (m + 1) / 2;
      Matrix H(n, s);
      H.leftCols(m) = X;
      Index col = m;
      for (Index i = 0; i < m; ++i)
        for (Index j = i; j < m; ++j) H.col(col++) = X.col(i).cwiseProduct(X.col(j));
      return H;
    }
  }
  throw std::invalid_argument("nonlinear_map: invalid mapping kind");
}

GdplsModel fit_gdpls(const Matrix& X, const Matrix& Y, int depth,
                     const std::vector<MappingSpec>& mappings,
                     const std::vector<int>& layer_ks, Task task,
                     std::vector<double> class_labels) {
  if (depth < 1) throw std::invalid_argument("fit_gdpls: depth must be >= 1");
  if (X.rows() != Y.rows()) throw std::invalid_argument("fit_gdpls: row counts differ");

  GdplsModel model;
  model.task = task;
  model.layer_ks = expand_ks(layer_ks, depth);
  if (mappings.size() == 1) {
    model.mappings.assign(static_cast<std::size_t>(depth), mappings[0]);
  } else if (mappings.size() == static_cast<std::size_t>(depth)) {
    model.mappings = mappings;
  } else {
    throw std::invalid_argument("fit_gdpls: need one mapping or one per layer");
  }
  model.y_means = Y.colwise().mean();
  model.class_labels = default_labels(Y.cols(), task, std::move(class_labels));

  Matrix input = X;
  for (int l = 0; l < depth; ++l) {
    Matrix mapped = nonlinear_map(model.mappings[static_cast<std::size_t>(l)], input);
    PlsModel layer = fit_layer(mapped, Y, model.layer_ks[static_cast<std::size_t>(l)], l, depth);
    input = layer.x_scores;
    model.layers.push_back(std::move(layer));
  }
  Matrix Yc = Y.rowwise() - model.y_means.transpose();
  model.head = ols_head(input, Yc);
  return model;
}

Matrix gdpls_predict(const GdplsModel& model, const Matrix& X) {
  Matrix input = X;
  for (std::size_t l = 0; l < model.layers.size(); ++l)
    input = pls_transform(model.layers[l], nonlinear_map(model.mappings[l], input));
  return (input * model.head).rowwise() + model.y_means.transpose();
}

std::vector<double> gdpls_predict_labels(const GdplsModel& model, const Matrix& X) {
  if (model.task != Task::classification)
    throw std::invalid_argument("gdpls_predict_labels: model is not a classifier");
  return decode_labels(gdpls_predict(model, X), model.class_labels);
}

std::vector<double> covariance_profile(const GdplsModel& model, const Matrix& X, const Matrix& Y) {
  return profile_impl(model.layers, X, Y, [&](std::size_t l, const Matrix& in) {
    return nonlinear_map(model.mappings[l], in);
  });
}

}  // namespace latentis
