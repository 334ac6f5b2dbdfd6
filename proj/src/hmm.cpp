#include "latentis/hmm.hpp"

#include <cmath>
#include <limits>

#include "latentis/rng.hpp"

namespace latentis {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_obs(const HmmModel& model, const std::vector<int>& obs) {
  if (obs.empty()) throw std::invalid_argument("hmm: empty observation sequence");
  for (int o : obs)
    if (o < 0 || o >= model.symbol_count)
      throw std::invalid_argument("hmm: symbol " + std::to_string(o) + " out of range [0, " +
                                  std::to_string(model.symbol_count) + ")");
}

struct ForwardBackward {
  Matrix alpha;   // T x k, filtered state posteriors
  Matrix beta;    // T x k, scaled backward variables
  Vector scale;   // T, per-step normalizers c_t
  double loglik;
};

ForwardBackward forward_backward(const HmmModel& model, const std::vector<int>& obs) {
  const int k = model.state_count;
  const Index T = static_cast<Index>(obs.size());
  ForwardBackward fb;
  fb.alpha = Matrix(T, k);
  fb.beta = Matrix(T, k);
  fb.scale = Vector(T);

  Vector a = model.initial.cwiseProduct(model.emission.col(obs[0]));
  fb.scale(0) = a.sum();
  if (fb.scale(0) <= 0) {
    fb.loglik = kNegInf;
    return fb;
  }
  fb.alpha.row(0) = a.transpose() / fb.scale(0);
  for (Index t = 1; t < T; ++t) {
    Vector pred = model.transition.transpose() * fb.alpha.row(t - 1).transpose();
    a = pred.cwiseProduct(model.emission.col(obs[static_cast<std::size_t>(t)]));
    fb.scale(t) = a.sum();
    if (fb.scale(t) <= 0) {
      fb.loglik = kNegInf;
      return fb;
    }
    fb.alpha.row(t) = a.transpose() / fb.scale(t);
  }

  fb.beta.row(T - 1).setOnes();
  for (Index t = T - 2; t >= 0; --t) {
    Vector next = model.emission.col(obs[static_cast<std::size_t>(t + 1)])
                      .cwiseProduct(fb.beta.row(t + 1).transpose());
    fb.beta.row(t) = (model.transition * next).transpose() / fb.scale(t + 1);
  }

  fb.loglik = fb.scale.array().log().sum();
  return fb;
}

}  // namespace

double hmm_loglik(const HmmModel& model, const std::vector<int>& obs) {
  check_obs(model, obs);
  const int k = model.state_count;
  (void)k;
  Vector alpha = model.initial.cwiseProduct(model.emission.col(obs[0]));
  double c = alpha.sum();
  if (c <= 0) return kNegInf;
  alpha /= c;
  double loglik = std::log(c);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    Vector a = (model.transition.transpose() * alpha).cwiseProduct(model.emission.col(obs[t]));
    c = a.sum();
    if (c <= 0) return kNegInf;
    alpha = a / c;
    loglik += std::log(c);
  }
  return loglik;
}

ViterbiResult hmm_viterbi(const HmmModel& model, const std::vector<int>& obs) {
  check_obs(model, obs);
  const int k = model.state_count;
  const std::size_t T = obs.size();

  // Scalar std::log, entry by entry. Eigen's vectorized log can differ from
  // libm by an ulp, which would break exact score comparisons downstream.
  const auto scalar_log = [](double x) { return std::log(x); };
  Matrix log_a = model.transition.unaryExpr(scalar_log);
  Matrix log_b = model.emission.unaryExpr(scalar_log);
  Vector delta(k);
  for (int i = 0; i < k; ++i) delta(i) = std::log(model.initial(i)) + log_b(i, obs[0]);
  if (delta.maxCoeff() == kNegInf)
    throw ImpossibleObservation("hmm_viterbi: first observation impossible under every state");
  Eigen::MatrixXi back(static_cast<Index>(T), k);

  for (std::size_t t = 1; t < T; ++t) {
    Vector next(k);
    for (int j = 0; j < k; ++j) {
      int arg = 0;
      double best = kNegInf;
      for (int i = 0; i < k; ++i) {
        const double cand = delta(i) + log_a(i, j);
        if (cand > best) {
          best = cand;
          arg = i;
        }
      }
      next(j) = best + log_b(j, obs[t]);
      back(static_cast<Index>(t), j) = arg;
    }
    delta = next;
    if (delta.maxCoeff() == kNegInf)
      throw ImpossibleObservation("hmm_viterbi: observation at position " + std::to_string(t) +
                                  " has zero probability under every state path");
  }

  ViterbiResult result;
  int state = 0;
  double best = kNegInf;
  for (int i = 0; i < k; ++i) {
    if (delta(i) > best) {
      best = delta(i);
      state = i;
    }
  }
  result.log_score = best;
  result.path.assign(T, 0);
  result.path[T - 1] = state;
  for (std::size_t t = T - 1; t > 0; --t) {
    state = back(static_cast<Index>(t), state);
    result.path[t - 1] = state;
  }
  return result;
}

namespace {

HmmModel baum_welch_single(const std::vector<std::vector<int>>& corpus, int k, int m,
                           const BaumWelchOptions& opts) {
  Rng rng(opts.seed);
  HmmModel model;
  model.state_count = k;
  model.symbol_count = m;
  model.transition = Matrix(k, k);
  model.emission = Matrix(k, m);
  model.initial = Vector(k);
  auto random_row = [&](Index size) {
    Eigen::RowVectorXd row(size);
    for (Index j = 0; j < size; ++j) row(j) = 0.1 + rng.uniform();
    return Eigen::RowVectorXd(row / row.sum());
  };
  for (int i = 0; i < k; ++i) model.transition.row(i) = random_row(k);
  for (int i = 0; i < k; ++i) model.emission.row(i) = random_row(m);
  model.initial = random_row(k).transpose();

  double prev_ll = kNegInf;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    Matrix trans_num = Matrix::Zero(k, k);
    Matrix emit_num = Matrix::Zero(k, m);
    Vector init_num = Vector::Zero(k);
    double total_ll = 0.0;

    for (const auto& seq : corpus) {
      ForwardBackward fb = forward_backward(model, seq);
      if (!std::isfinite(fb.loglik))
        throw std::runtime_error("hmm_baum_welch: zero-probability sequence during training");
      total_ll += fb.loglik;
      const Index T = static_cast<Index>(seq.size());

      for (Index t = 0; t < T; ++t) {
        Vector gamma = fb.alpha.row(t).cwiseProduct(fb.beta.row(t)).transpose();
        if (t == 0) init_num += gamma;
        emit_num.col(seq[static_cast<std::size_t>(t)]) += gamma;
      }
      for (Index t = 0; t + 1 < T; ++t) {
        Vector next = model.emission.col(seq[static_cast<std::size_t>(t + 1)])
                          .cwiseProduct(fb.beta.row(t + 1).transpose()) /
                      fb.scale(t + 1);
        trans_num += fb.alpha.row(t).transpose() * next.transpose();
      }
    }
    // trans_num accumulated the outer products without the transition factor.
    trans_num = trans_num.cwiseProduct(model.transition);

    model.loglik_trace.push_back(total_ll);

    for (int i = 0; i < k; ++i) {
      const double ts = trans_num.row(i).sum();
      if (ts > 0) model.transition.row(i) = trans_num.row(i) / ts;
      const double es = emit_num.row(i).sum();
      if (es > 0) model.emission.row(i) = emit_num.row(i) / es;
    }
    model.initial = init_num / init_num.sum();

    if (iter > 0 && std::abs(total_ll - prev_ll) < opts.tol * std::abs(total_ll)) {
      model.converged = true;
      break;
    }
    prev_ll = total_ll;
  }
  return model;
}

}  // namespace

HmmModel hmm_baum_welch(const std::vector<std::vector<int>>& corpus, int k, int m,
                        const BaumWelchOptions& opts) {
  if (corpus.empty()) throw std::invalid_argument("hmm_baum_welch: empty corpus");
  if (k < 1 || m < 1) throw std::invalid_argument("hmm_baum_welch: k and m must be >= 1");
  if (opts.restarts < 1) throw std::invalid_argument("hmm_baum_welch: restarts must be >= 1");
  for (const auto& seq : corpus) {
    if (seq.empty()) throw std::invalid_argument("hmm_baum_welch: empty sequence in corpus");
    for (int o : seq)
      if (o < 0 || o >= m) throw std::invalid_argument("hmm_baum_welch: symbol out of range");
  }

  HmmModel best;
  double best_ll = kNegInf;
  for (int r = 0; r < opts.restarts; ++r) {
    BaumWelchOptions run = opts;
    run.seed = opts.seed + static_cast<std::uint64_t>(r);
    HmmModel model = baum_welch_single(corpus, k, m, run);
    if (model.loglik_trace.back() > best_ll) {
      best_ll = model.loglik_trace.back();
      best = std::move(model);
    }
  }
  return best;
}

}  // namespace latentis
