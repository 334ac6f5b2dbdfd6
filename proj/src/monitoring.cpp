#include "latentis/monitoring.hpp"

#include <algorithm>
#include <cmath>

namespace latentis {

void validate(const FusionParams& p) {
  if (!(p.delta > 0 && p.delta < 1))
    throw std::invalid_argument("fusion params: delta must lie in (0, 1)");
  if (!(p.eta > 0 && p.eta < 1))
    throw std::invalid_argument("fusion params: eta must lie in (0, 1)");
  if (!(p.mu > 0)) throw std::invalid_argument("fusion params: mu must be positive");
  if (p.window < 1) throw std::invalid_argument("fusion params: window must be >= 1");
}

const char* stat_kind_name(StatKind kind) {
  switch (kind) {
    case StatKind::T2: return "t2";
    case StatKind::QT: return "qt";
    case StatKind::I2: return "i2";
    case StatKind::QI: return "qi";
  }
  return "?";
}

double t2_statistic(const PcaModel& model, const Vector& x) {
  if (x.size() != model.loadings_p.rows())
    throw std::invalid_argument("t2_statistic: dimension mismatch");
  const double floor = std::max(model.eigenvalues(0), 1.0) * 1e-12;
  Vector t = model.loadings_p.transpose() * x;
  double stat = 0.0;
  for (int j = 0; j < model.k; ++j) {
    if (model.eigenvalues(j) <= floor)
      throw std::runtime_error("t2_statistic: retained eigenvalue " + std::to_string(j) +
                               " is below floor; T^2 would be ill-conditioned");
    stat += t(j) * t(j) / model.eigenvalues(j);
  }
  return stat;
}

double spe_statistic(const PcaModel& model, const Vector& x) {
  if (x.size() != model.loadings_p.rows())
    throw std::invalid_argument("spe_statistic: dimension mismatch");
  Vector recon = model.loadings_p * (model.loadings_p.transpose() * x);
  return (x - recon).squaredNorm();
}

double i2_statistic(const IcaModel& model, const Vector& x) {
  if (x.size() != model.separating.cols())
    throw std::invalid_argument("i2_statistic: dimension mismatch");
  return (model.separating * x).squaredNorm();
}

double qi_statistic(const IcaModel& model, const Vector& x) {
  if (x.size() != model.separating.cols())
    throw std::invalid_argument("qi_statistic: dimension mismatch");
  Vector s = model.separating * x;
  return (x - model.mixing * s).squaredNorm();
}

ControlLimit kde_control_limit(const StatisticSeries& stats, double delta) {
  const Index n = stats.values.size();
  if (n < 30) throw std::invalid_argument("kde_control_limit: need at least 30 statistics");
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("kde_control_limit: delta must lie in (0, 1)");

  const double mean = stats.values.mean();
  const double var = (stats.values.array() - mean).square().sum() / static_cast<double>(n - 1);
  const double sd = std::sqrt(var);

  ControlLimit cl;
  cl.delta = delta;
  if (sd <= 0) {
    cl.limit = stats.values(0) + 1e-9 * std::max(1.0, std::abs(stats.values(0)));
    cl.bandwidth = 0.0;
    cl.degenerate = true;
    return cl;
  }

  // Silverman's rule of thumb with the interquartile-range guard.
  std::vector<double> sorted(stats.values.data(), stats.values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return lo + 1 < sorted.size() ? sorted[lo] * (1 - frac) + sorted[lo + 1] * frac : sorted[lo];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0) spread = std::min(sd, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  cl.bandwidth = h;

  // Trapezoid-integrated density over a padded grid, then bisection on the
  // interpolated CDF.
  const double lo = sorted.front() - 6.0 * h;
  const double hi = sorted.back() + 6.0 * h;
  constexpr int kGrid = 2048;
  const double step = (hi - lo) / (kGrid - 1);
  Vector pdf(kGrid);
  const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * M_PI));
  for (int g = 0; g < kGrid; ++g) {
    const double s = lo + g * step;
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double z = (s - sorted[static_cast<std::size_t>(i)]) / h;
      acc += std::exp(-0.5 * z * z);
    }
    pdf(g) = acc * norm;
  }
  Vector cdf(kGrid);
  cdf(0) = 0.0;
  for (int g = 1; g < kGrid; ++g) cdf(g) = cdf(g - 1) + 0.5 * (pdf(g) + pdf(g - 1)) * step;
  const double total = cdf(kGrid - 1);

  const auto cdf_at = [&](double s) {
    if (s <= lo) return 0.0;
    if (s >= hi) return 1.0;
    const double pos = (s - lo) / step;
    const auto g = static_cast<int>(pos);
    const double frac = pos - g;
    return (cdf(g) * (1 - frac) + cdf(std::min(g + 1, kGrid - 1)) * frac) / total;
  };

  const double target = 1.0 - delta;
  double a = sorted.front();
  double b = sorted.back() + 3.0 * h;
  const double width_tol = 1e-6 * (b - a);
  for (int it = 0; it < 200 && (b - a) > width_tol; ++it) {
    const double mid = 0.5 * (a + b);
    if (cdf_at(mid) < target)
      a = mid;
    else
      b = mid;
  }
  cl.limit = 0.5 * (a + b);
  return cl;
}

double bayes_posterior(double S, const ControlLimit& limit, const FusionParams& params) {
  validate(params);
  if (S < 0) throw std::invalid_argument("bayes_posterior: statistic must be nonnegative");
  if (S == 0) return 0.0;
  // At the limit both conditionals equal exp(-mu) and cancel, leaving the prior.
  if (S == limit.limit) return params.delta;
  const double p_fault = std::exp(-params.mu * limit.limit / S);
  const double p_normal = std::exp(-params.mu * S / limit.limit);
  const double evidence = p_normal * (1.0 - params.delta) + p_fault * params.delta;
  return p_fault * params.delta / evidence;
}

namespace {

// Shared weighting rule: per input, weight 1/eta when both the current value
// and its recent mean clear delta, else eta; output the weighted mean.
double consistency_weighted_mean(const std::vector<double>& current,
                                 const std::vector<std::vector<double>>& history,
                                 const FusionParams& params) {
  validate(params);
  if (current.empty()) throw std::invalid_argument("fusion: empty input list");
  if (!history.empty() && history.size() != current.size())
    throw std::invalid_argument("fusion: history size does not match input size");

  // A weighted mean of a constant is that constant; short-circuit to keep the
  // identity exact in floating point (covers the single-input case too).
  bool constant = true;
  for (double v : current)
    if (v != current.front()) {
      constant = false;
      break;
    }
  if (constant) return current.front();

  double num = 0.0;
  double den = 0.0;
  for (std::size_t l = 0; l < current.size(); ++l) {
    double recent_mean = current[l];
    if (!history.empty() && !history[l].empty()) {
      const auto& hist = history[l];
      const std::size_t take = std::min<std::size_t>(hist.size(), params.window);
      double acc = 0.0;
      for (std::size_t i = hist.size() - take; i < hist.size(); ++i) acc += hist[i];
      recent_mean = acc / static_cast<double>(take);
    }
    const bool agree = current[l] >= params.delta && recent_mean >= params.delta;
    const double w = agree ? 1.0 / params.eta : params.eta;
    num += w * current[l];
    den += w;
  }
  return num / den;
}

}  // namespace

double weight_and_fuse(const std::vector<double>& posteriors,
                       const std::vector<std::vector<double>>& history,
                       const FusionParams& params) {
  return consistency_weighted_mean(posteriors, history, params);
}

double fuse_odbs(const std::vector<double>& dbs_values,
                 const std::vector<std::vector<double>>& history,
                 const FusionParams& params) {
  return consistency_weighted_mean(dbs_values, history, params);
}

namespace {

int cpv_components(const Vector& eigenvalues, double cpv, Index dim) {
  const double total = eigenvalues.sum();
  if (total <= 0) return 0;
  double acc = 0.0;
  int k = 0;
  for (Index j = 0; j < eigenvalues.size(); ++j) {
    acc += eigenvalues(j);
    ++k;
    if (acc / total >= cpv) break;
  }
  // Keep a nonempty residual subspace so the Q statistic stays informative.
  if (dim >= 2) k = std::min<int>(k, static_cast<int>(dim) - 1);
  return std::max(k, 1);
}

int usable_rank(const Matrix& second_moment_data, Index limit) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(second_moment_data);
  const Vector& ev = es.eigenvalues();
  const double floor = std::max(ev(ev.size() - 1), 1.0) * 1e-9;
  int rank = 0;
  for (Index j = 0; j < ev.size(); ++j)
    if (ev(j) > floor) ++rank;
  return std::min<int>(rank, static_cast<int>(limit));
}

}  // namespace

DeepDetector build_dpi(const Matrix& train, const DpiOptions& opts, DpiTrainingTrace* trace) {
  validate(opts.params);
  if (opts.depth < 1) throw std::invalid_argument("build_dpi: depth must be >= 1");
  if (train.rows() < 30) throw std::invalid_argument("build_dpi: need at least 30 samples");
  if (!(opts.cpv > 0 && opts.cpv <= 1))
    throw std::invalid_argument("build_dpi: cpv must lie in (0, 1]");

  DeepDetector det;
  det.params = opts.params;

  Matrix pca_input = train;                 // n x dim_l
  Matrix ica_input;                         // dim_l x n (set after layer 1)
  const Index n = train.rows();

  for (int layer = 0; layer < opts.depth; ++layer) {
    const Index dim = pca_input.cols();
    if (dim < 1)
      throw std::runtime_error("build_dpi: latent dimension collapsed; achievable depth is " +
                               std::to_string(layer));

    // PCA branch.
    PcaModel full = fit_pca(pca_input, static_cast<int>(dim), false);
    int k_pca;
    if (static_cast<std::size_t>(layer) < opts.pca_ks.size() && opts.pca_ks[layer] > 0) {
      k_pca = std::min<int>(opts.pca_ks[layer], static_cast<int>(dim));
    } else {
      k_pca = cpv_components(full.eigenvalues, opts.cpv, dim);
    }
    if (k_pca < 1)
      throw std::runtime_error("build_dpi: latent dimension collapsed; achievable depth is " +
                               std::to_string(layer));
    PcaModel pca = fit_pca(pca_input, k_pca, false);
    Matrix scores = pca_transform(pca, pca_input);

    // ICA branch: seeded by the layer-1 PCA residual, then chained on sources.
    if (layer == 0) ica_input = pca_residual(pca, pca_input).transpose();
    const int rank = usable_rank(ica_input * ica_input.transpose() / static_cast<double>(n),
                                 ica_input.rows());
    int k_ica = std::min(rank, opts.ica_cap);
    if (static_cast<std::size_t>(layer) < opts.ica_ks.size() && opts.ica_ks[layer] > 0)
      k_ica = std::min(opts.ica_ks[layer], rank);
    if (k_ica < 1)
      throw std::runtime_error("build_dpi: source dimension collapsed; achievable depth is " +
                               std::to_string(layer));
    IcaOptions ica_opts;
    ica_opts.seed = opts.seed + static_cast<std::uint64_t>(layer);
    IcaModel ica = fit_ica(ica_input, k_ica, ica_opts);
    Matrix sources = ica_sources(ica, ica_input);

    // Training statistics and their limits.
    std::array<ControlLimit, kStatKinds> layer_limits;
    for (int kind = 0; kind < kStatKinds; ++kind) {
      StatisticSeries series;
      series.layer = layer + 1;
      series.kind = static_cast<StatKind>(kind);
      series.values = Vector(n);
      for (Index i = 0; i < n; ++i) {
        const Vector xp = pca_input.row(i).transpose();
        const Vector xi = ica_input.col(i);
        switch (static_cast<StatKind>(kind)) {
          case StatKind::T2: series.values(i) = t2_statistic(pca, xp); break;
          case StatKind::QT: series.values(i) = spe_statistic(pca, xp); break;
          case StatKind::I2: series.values(i) = i2_statistic(ica, xi); break;
          case StatKind::QI: series.values(i) = qi_statistic(ica, xi); break;
        }
      }
      layer_limits[static_cast<std::size_t>(kind)] =
          kde_control_limit(series, opts.params.delta);
      if (trace) trace->statistics.push_back(series);
    }

    det.pca_layers.push_back(std::move(pca));
    det.ica_layers.push_back(std::move(ica));
    det.limits.push_back(layer_limits);
    if (trace) {
      trace->pca_features.push_back(scores);
      trace->ica_sources.push_back(sources);
    }

    pca_input = std::move(scores);
    ica_input = std::move(sources);
  }

  det.depth = opts.depth;
  return det;
}

DetectionRecord detect(const DeepDetector& detector, const Vector& x, DetectorState& state) {
  if (detector.depth < 1) throw std::invalid_argument("detect: uninitialized detector");
  if (x.size() != detector.pca_layers[0].loadings_p.rows())
    throw std::invalid_argument("detect: dimension mismatch");
  if (state.layer_history.empty())
    state.layer_history.resize(static_cast<std::size_t>(detector.depth));

  const FusionParams& params = detector.params;
  DetectionRecord rec;
  rec.posteriors = Matrix(detector.depth, kStatKinds);

  Vector pca_vec = x;
  Vector ica_vec;
  for (int layer = 0; layer < detector.depth; ++layer) {
    const PcaModel& pca = detector.pca_layers[static_cast<std::size_t>(layer)];
    const IcaModel& ica = detector.ica_layers[static_cast<std::size_t>(layer)];
    if (layer == 0) ica_vec = pca_vec - pca.loadings_p * (pca.loadings_p.transpose() * pca_vec);

    const double stats[kStatKinds] = {
        t2_statistic(pca, pca_vec), spe_statistic(pca, pca_vec),
        i2_statistic(ica, ica_vec), qi_statistic(ica, ica_vec)};
    for (int kind = 0; kind < kStatKinds; ++kind) {
      rec.posteriors(layer, kind) = bayes_posterior(
          stats[kind], detector.limits[static_cast<std::size_t>(layer)][static_cast<std::size_t>(kind)],
          params);
    }

    pca_vec = pca.loadings_p.transpose() * pca_vec;
    ica_vec = ica.separating * ica_vec;
  }

  // Fuse across layers per statistic kind, then across kinds.
  std::vector<double> dbs_current;
  for (int kind = 0; kind < kStatKinds; ++kind) {
    std::vector<double> current;
    std::vector<std::vector<double>> history;
    for (int layer = 0; layer < detector.depth; ++layer) {
      current.push_back(rec.posteriors(layer, kind));
      const auto& ring = state.layer_history[static_cast<std::size_t>(layer)]
                                            [static_cast<std::size_t>(kind)];
      history.emplace_back(ring.begin(), ring.end());
    }
    rec.dbs[static_cast<std::size_t>(kind)] = weight_and_fuse(current, history, params);
    dbs_current.push_back(rec.dbs[static_cast<std::size_t>(kind)]);
  }
  {
    std::vector<std::vector<double>> history;
    for (int kind = 0; kind < kStatKinds; ++kind) {
      const auto& ring = state.dbs_history[static_cast<std::size_t>(kind)];
      history.emplace_back(ring.begin(), ring.end());
    }
    rec.odbs = fuse_odbs(dbs_current, history, params);
  }
  rec.is_fault = rec.odbs >= params.delta;

  // Update the stream state (bounded ring buffers).
  const auto push = [&](std::deque<double>& ring, double v) {
    ring.push_back(v);
    while (ring.size() > static_cast<std::size_t>(params.window)) ring.pop_front();
  };
  for (int layer = 0; layer < detector.depth; ++layer)
    for (int kind = 0; kind < kStatKinds; ++kind)
      push(state.layer_history[static_cast<std::size_t>(layer)][static_cast<std::size_t>(kind)],
           rec.posteriors(layer, kind));
  for (int kind = 0; kind < kStatKinds; ++kind)
    push(state.dbs_history[static_cast<std::size_t>(kind)], rec.dbs[static_cast<std::size_t>(kind)]);

  return rec;
}

}  // namespace latentis
