#pragma once

#include <cstdint>
#include <vector>

#include "latentis/types.hpp"

namespace latentis {

/// Discrete hidden Markov model: k states, m observation symbols.
/// transition and emission rows and the initial vector are stochastic.
struct HmmModel {
  Matrix transition;  // k x k
  Matrix emission;    // k x m
  Vector initial;     // k
  int state_count = 0;
  int symbol_count = 0;
  std::vector<double> loglik_trace;  // filled by hmm_baum_welch
  bool converged = false;
};

/// An observation impossible under every state (zero path probability).
struct ImpossibleObservation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// log P(O | model) by the scaled forward recursion.
double hmm_loglik(const HmmModel& model, const std::vector<int>& obs);

struct ViterbiResult {
  std::vector<int> path;
  double log_score;
};

/// Most probable state path in log-space; ties break toward the lower state
/// index at every step.
ViterbiResult hmm_viterbi(const HmmModel& model, const std::vector<int>& obs);

struct BaumWelchOptions {
  int max_iter = 100;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int restarts = 1;  // independent seeded starts; the best likelihood wins
};

/// EM over a corpus of observation sequences with scaled forward-backward
/// passes. Parameters start from seeded random stochastic matrices; with
/// restarts > 1 the runs use seed, seed+1, ... and the highest final
/// log-likelihood is kept (EM saddles are common on symmetric data).
HmmModel hmm_baum_welch(const std::vector<std::vector<int>>& corpus, int k, int m,
                        const BaumWelchOptions& opts = {});

}  // namespace latentis
