#pragma once

#include <cstdint>
#include <vector>

#include "latentis/pls.hpp"
#include "latentis/types.hpp"

namespace latentis {

enum class Task { regression, classification };

/// Cascaded PLS: every layer is a PLS fit between the previous layer's
/// X-side scores and the same target block Y; the top-layer scores feed an
/// ordinary least-squares head.
struct DplsModel {
  std::vector<PlsModel> layers;
  std::vector<int> layer_ks;
  Matrix head;       // k_L x d
  Task task = Task::regression;
  Vector y_means;    // d
  std::vector<double> class_labels;  // per one-hot column (classification)
};

/// layer_ks gives the component count per layer (a single entry is reused
/// for all layers). Throws when a layer's input rank cannot support its k,
/// reporting the achievable depth.
DplsModel fit_dpls(const Matrix& X, const Matrix& Y, int depth,
                   const std::vector<int>& layer_ks, Task task,
                   std::vector<double> class_labels = {});

/// Continuous predictions (for classification: one score column per class).
Matrix dpls_predict(const DplsModel& model, const Matrix& X);

/// Argmax decode of the class scores; ties go to the lowest label index.
std::vector<double> dpls_predict_labels(const DplsModel& model, const Matrix& X);

/// Per-layer covariance (1/n) u1' v1 between the first pair of latent
/// variables, evaluated on the given data.
std::vector<double> covariance_profile(const DplsModel& model, const Matrix& X, const Matrix& Y);

enum class MappingKind { identity, tanh_expand, random_fourier, polynomial2 };

/// Deterministic feature map; random weights are regenerated from the seed
/// on every call, so the map is a pure function of (input, spec).
struct MappingSpec {
  MappingKind kind = MappingKind::identity;
  int output_dim = 0;  // width s for tanh_expand / random_fourier
  std::uint64_t seed = 0;
};

Matrix nonlinear_map(const MappingSpec& spec, const Matrix& X);

/// Generalized deep PLS: a nonlinear mapping in front of every PLS layer.
/// With all-identity mappings this reduces exactly to DPLS.
struct GdplsModel {
  std::vector<MappingSpec> mappings;
  std::vector<PlsModel> layers;
  std::vector<int> layer_ks;
  Matrix head;
  Task task = Task::regression;
  Vector y_means;
  std::vector<double> class_labels;
};

GdplsModel fit_gdpls(const Matrix& X, const Matrix& Y, int depth,
                     const std::vector<MappingSpec>& mappings,
                     const std::vector<int>& layer_ks, Task task,
                     std::vector<double> class_labels = {});

Matrix gdpls_predict(const GdplsModel& model, const Matrix& X);
std::vector<double> gdpls_predict_labels(const GdplsModel& model, const Matrix& X);
std::vector<double> covariance_profile(const GdplsModel& model, const Matrix& X, const Matrix& Y);

}  // namespace latentis
