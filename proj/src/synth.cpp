#include "latentis/synth.hpp"

#include <cmath>

#include "latentis/rng.hpp"

namespace latentis {

namespace {

std::vector<std::string> default_names(Index m) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

int sample_categorical(Rng& rng, const Vector& probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace

LinearGaussianSample gen_linear_gaussian(const LinearGaussianSpec& spec) {
  const Index m = spec.W.rows();
  const Index k = spec.W.cols();
  if (spec.mu.size() != m || spec.psi.size() != m)
    throw std::invalid_argument("gen_linear_gaussian: inconsistent dimensions");
  if ((spec.psi.array() < 0).any())
    throw std::invalid_argument("gen_linear_gaussian: negative noise variance");
  if (spec.n < 1) throw std::invalid_argument("gen_linear_gaussian: n must be >= 1");

  Rng rng(spec.seed);
  Matrix latents(spec.n, k);
  Matrix values(spec.n, m);
  Vector noise_std = spec.psi.cwiseSqrt();
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = 0; j < k; ++j) latents(i, j) = rng.gaussian();
    Vector x = spec.W * latents.row(i).transpose() + spec.mu;
    for (Index j = 0; j < m; ++j) x(j) += noise_std(j) * rng.gaussian();
    values.row(i) = x.transpose();
  }
  return {Dataset{std::move(values), default_names(m)}, std::move(latents)};
}

MixtureSample gen_gmm(const MixtureSpec& spec) {
  const std::size_t k = spec.weights.size();
  if (k == 0 || spec.means.size() != k || spec.covariances.size() != k)
    throw std::invalid_argument("gen_gmm: inconsistent component lists");
  if (spec.n < 1) throw std::invalid_argument("gen_gmm: n must be >= 1");
  const Index m = spec.means[0].size();

  Vector probs(static_cast<Index>(k));
  for (std::size_t i = 0; i < k; ++i) probs(static_cast<Index>(i)) = spec.weights[i];
  if (std::abs(probs.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("gen_gmm: weights must sum to 1");

  std::vector<Matrix> chol;
  for (const auto& cov : spec.covariances) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("gen_gmm: covariance not positive definite");
    chol.push_back(llt.matrixL());
  }

  Rng rng(spec.seed);
  Matrix values(spec.n, m);
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) {
    const int c = sample_categorical(rng, probs);
    labels[static_cast<std::size_t>(i)] = c;
    Vector z(m);
    for (Index j = 0; j < m; ++j) z(j) = rng.gaussian();
    values.row(i) =
        (spec.means[static_cast<std::size_t>(c)] + chol[static_cast<std::size_t>(c)] * z)
            .transpose();
  }
  return {Dataset{std::move(values), default_names(m)}, std::move(labels)};
}

HmmSample gen_hmm(const HmmGenSpec& spec) {
  const HmmModel& hmm = spec.model;
  if (hmm.state_count < 1 || hmm.symbol_count < 1)
    throw std::invalid_argument("gen_hmm: invalid model");
  if (spec.sequences < 1 || spec.length < 1)
    throw std::invalid_argument("gen_hmm: sequences and length must be >= 1");

  Rng rng(spec.seed);
  HmmSample sample;
  for (int s = 0; s < spec.sequences; ++s) {
    std::vector<int> states, obs;
    int state = sample_categorical(rng, hmm.initial);
    for (int t = 0; t < spec.length; ++t) {
      if (t > 0) state = sample_categorical(rng, hmm.transition.row(state).transpose());
      states.push_back(state);
      obs.push_back(sample_categorical(rng, hmm.emission.row(state).transpose()));
    }
    sample.states.push_back(std::move(states));
    sample.observations.push_back(std::move(obs));
  }
  return sample;
}

FaultSample gen_process_with_fault(const FaultSpec& spec) {
  if (spec.onset < 0 || spec.onset >= spec.plant.n)
    throw std::invalid_argument("gen_process_with_fault: onset outside [0, n)");
  if (spec.variance_factor < 0)
    throw std::invalid_argument("gen_process_with_fault: negative variance factor");
  const Index m = spec.plant.W.rows();
  for (Index j : spec.affected)
    if (j < 0 || j >= m)
      throw std::invalid_argument("gen_process_with_fault: affected variable out of range");

  LinearGaussianSample base = gen_linear_gaussian(spec.plant);
  Matrix& values = base.data.values;

  // Nominal per-variable standard deviation of the plant: diag(W W' + Psi).
  Vector nominal_std =
      ((spec.plant.W * spec.plant.W.transpose()).diagonal() + spec.plant.psi).cwiseSqrt();

  Rng rng(spec.plant.seed ^ 0x9e3779b97f4a7c15ull);  // independent fault-noise stream
  const double extra_sd = std::sqrt(std::max(spec.variance_factor - 1.0, 0.0));
  std::vector<bool> mask(static_cast<std::size_t>(spec.plant.n), false);
  for (Index i = spec.onset; i < spec.plant.n; ++i) {
    mask[static_cast<std::size_t>(i)] = true;
    for (Index j : spec.affected) {
      values(i, j) += spec.shift_sigmas * nominal_std(j);
      if (extra_sd > 0) values(i, j) += extra_sd * nominal_std(j) * rng.gaussian();
    }
  }
  return {std::move(base.data), std::move(mask)};
}

}  // namespace latentis
