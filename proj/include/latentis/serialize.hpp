#pragma once

#include <optional>
#include <string>
#include <variant>

#include "latentis/cca.hpp"
#include "latentis/dataio.hpp"
#include "latentis/deep_pls.hpp"
#include "latentis/fa.hpp"
#include "latentis/gmm.hpp"
#include "latentis/hmm.hpp"
#include "latentis/ica.hpp"
#include "latentis/monitoring.hpp"
#include "latentis/pca.hpp"
#include "latentis/pls.hpp"
#include "latentis/types.hpp"

namespace latentis {

using AnyModel = std::variant<FaModel, PcaModel, IcaModel, CcaModel, PlsModel, GmmModel,
                              HmmModel, DeepDetector, DplsModel, GdplsModel>;

/// One persistable artifact: the fitted model plus the scaler used to
/// normalize its training data (when the pipeline applied one).
struct ModelFile {
  AnyModel model;
  std::optional<Scaler> scaler;
};

std::string model_kind(const AnyModel& model);

/// One JSON document per model with top-level {format_version, kind, payload}.
/// Doubles are emitted with shortest round-trip precision, so a save/load
/// cycle reproduces every parameter bit-for-bit.
void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

template <class T>
T load_model_as(const std::string& path) {
  ModelFile file = load_model(path);
  if (!std::holds_alternative<T>(file.model))
    throw KindError("model file " + path + " holds kind '" + model_kind(file.model) + "'");
  return std::get<T>(std::move(file.model));
}

}  // namespace latentis
