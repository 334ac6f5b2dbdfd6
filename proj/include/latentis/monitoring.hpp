#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "latentis/ica.hpp"
#include "latentis/pca.hpp"
#include "latentis/types.hpp"

namespace latentis {

/// Knobs of the Bayesian fusion stage: mu softens the exponential likelihoods
/// against outliers, delta is the fault prior / significance level, eta is
/// the down-weight for layers that disagree with the fault hypothesis, and
/// window is the number of previous samples behind the smoothed posterior.
struct FusionParams {
  double mu = 1.0;
  double delta = 0.01;
  double eta = 0.01;
  int window = 10;
};

void validate(const FusionParams& p);

enum class StatKind { T2 = 0, QT = 1, I2 = 2, QI = 3 };
constexpr int kStatKinds = 4;
const char* stat_kind_name(StatKind kind);

/// Per-sample monitoring values of one statistic at one layer.
struct StatisticSeries {
  Vector values;  // nonnegative
  int layer = 0;
  StatKind kind = StatKind::T2;
};

/// Threshold at significance delta, estimated by a Gaussian-kernel density
/// over the training statistics.
struct ControlLimit {
  double limit = 0.0;
  double delta = 0.0;
  double bandwidth = 0.0;
  bool degenerate = false;  // training statistics were constant
};

/// Hotelling T^2 of the retained principal scores: t' diag(lambda)^-1 t.
double t2_statistic(const PcaModel& model, const Vector& x);
/// Squared reconstruction error in the residual subspace.
double spe_statistic(const PcaModel& model, const Vector& x);
/// Squared norm of the estimated sources.
double i2_statistic(const IcaModel& model, const Vector& x);
/// Squared reconstruction error of the source model.
double qi_statistic(const IcaModel& model, const Vector& x);

/// (1-delta) quantile of the kernel density over >= 30 training values,
/// located by bisection on the trapezoid-integrated CDF. Constant training
/// statistics yield limit = constant + epsilon with the degenerate flag set.
ControlLimit kde_control_limit(const StatisticSeries& stats, double delta);

/// Posterior fault probability of a statistic value S against its limit:
/// exponential conditional likelihoods exp(-mu*S_lim/S) under fault and
/// exp(-mu*S/S_lim) under normal operation, combined with prior delta.
/// S = 0 maps to probability 0.
double bayes_posterior(double S, const ControlLimit& limit, const FusionParams& params);

/// Consistency-weighted fusion across layers: a layer gets weight 1/eta when
/// both its current posterior and its recent mean exceed delta, else eta;
/// the result is the weighted mean. history[l] holds that layer's previous
/// posteriors (oldest first); an empty history falls back to the current
/// value.
double weight_and_fuse(const std::vector<double>& posteriors,
                       const std::vector<std::vector<double>>& history,
                       const FusionParams& params);

/// The same weighting rule applied across statistic kinds, with per-kind
/// deep Bayesian statistics as inputs.
double fuse_odbs(const std::vector<double>& dbs_values,
                 const std::vector<std::vector<double>>& history,
                 const FusionParams& params);

/// Deep PCA-ICA detector: PCA chained on retained scores, ICA chained on the
/// layer-1 PCA residual, with one KDE control limit per layer and statistic.
struct DeepDetector {
  std::vector<PcaModel> pca_layers;
  std::vector<IcaModel> ica_layers;
  std::vector<std::array<ControlLimit, kStatKinds>> limits;
  FusionParams params;
  int depth = 0;
};

struct DpiOptions {
  int depth = 3;
  double cpv = 0.90;            // cumulative-percent-variance retention per PCA layer
  int ica_cap = 8;              // max sources per ICA layer
  FusionParams params;
  std::uint64_t seed = 0;       // FastICA initialization
  std::vector<int> pca_ks;      // optional explicit per-layer widths (overrides cpv)
  std::vector<int> ica_ks;      // optional explicit per-layer source counts (overrides cap)
};

/// Training-time feature matrices, exposed for chain-consistency checks.
struct DpiTrainingTrace {
  std::vector<Matrix> pca_features;   // T per layer, n x k_l
  std::vector<Matrix> ica_sources;    // S per layer, k_l x n
  std::vector<StatisticSeries> statistics;  // 4 per layer
};

/// Builds the detector on normalized normal-operation data (n >= 30).
/// Throws if the latent dimension collapses before the requested depth,
/// reporting the achievable depth.
DeepDetector build_dpi(const Matrix& train, const DpiOptions& opts,
                       DpiTrainingTrace* trace = nullptr);

/// Per-kind deep Bayesian statistics and their overall fusion for one sample.
struct DetectionRecord {
  Matrix posteriors;                    // depth x 4
  std::array<double, kStatKinds> dbs{}; // fused per statistic kind
  double odbs = 0.0;
  bool is_fault = false;
};

/// Ring buffers of recent posteriors, one set per monitored stream.
struct DetectorState {
  std::vector<std::array<std::deque<double>, kStatKinds>> layer_history;
  std::array<std::deque<double>, kStatKinds> dbs_history;
};

/// Scores one normalized sample and appends its posteriors to the stream
/// state (bounded by params.window).
DetectionRecord detect(const DeepDetector& detector, const Vector& x, DetectorState& state);

}  // namespace latentis
