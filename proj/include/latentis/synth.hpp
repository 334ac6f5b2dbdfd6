#pragma once

#include <cstdint>
#include <vector>

#include "latentis/dataio.hpp"
#include "latentis/hmm.hpp"
#include "latentis/types.hpp"

namespace latentis {

/// Linear-Gaussian plant: x = W t + mu + eps with t ~ N(0, I) and
/// eps ~ N(0, diag(psi)). psi entries may be zero (noiseless channels).
struct LinearGaussianSpec {
  Matrix W;   // m x k
  Vector mu;  // m
  Vector psi; // m, nonnegative
  Index n = 0;
  std::uint64_t seed = 0;
};

struct LinearGaussianSample {
  Dataset data;
  Matrix latents;  // n x k ground-truth factors
};

LinearGaussianSample gen_linear_gaussian(const LinearGaussianSpec& spec);

struct MixtureSpec {
  std::vector<double> weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  Index n = 0;
  std::uint64_t seed = 0;
};

struct MixtureSample {
  Dataset data;
  std::vector<int> labels;  // generating component per row
};

MixtureSample gen_gmm(const MixtureSpec& spec);

struct HmmGenSpec {
  HmmModel model;
  int sequences = 1;
  int length = 1;
  std::uint64_t seed = 0;
};

struct HmmSample {
  std::vector<std::vector<int>> observations;
  std::vector<std::vector<int>> states;
};

HmmSample gen_hmm(const HmmGenSpec& spec);

/// Normal operation from a linear-Gaussian plant; from `onset` onward the
/// affected variables get an additive shift of shift_sigmas times their
/// nominal standard deviation and/or noise inflated by variance_factor.
struct FaultSpec {
  LinearGaussianSpec plant;
  Index onset = 0;
  std::vector<Index> affected;
  double shift_sigmas = 0.0;
  double variance_factor = 1.0;
};

struct FaultSample {
  Dataset data;
  std::vector<bool> mask;  // true on faulty rows
};

FaultSample gen_process_with_fault(const FaultSpec& spec);

}  // namespace latentis
