#pragma once

// StepModel builders for uncertain observations and multi-model dynamics.
// Every builder returns the model for the step ending at k (see StepModel).

#include <cstddef>
#include <functional>
#include <vector>

#include "rpkf/filter_core.hpp"
#include "rpkf/random_matrix.hpp"

namespace rpkf {

/// Probability as a function of the step index.
using ProbabilitySchedule = std::function<double(std::size_t k)>;

inline ProbabilitySchedule constant_probability(double p) {
  return [p](std::size_t) { return p; };
}

/// Observation selected from {H^i} with known probabilities, the active
/// index being hidden from the estimator.
struct UncertainObsModel {
  MatrixDist measurement_dist;
  // Either one noise per measurement model (same order as the distribution)
  // or empty, in which case `measurement_noise` is shared.
  std::vector<Matrix> per_model_noise;
  Matrix measurement_noise;
  RandomMatrixSpec transition;
  Matrix process_noise;
};

/// Single sensor that returns h·x + ω with probability p(k), ω alone otherwise.
struct NahiModel {
  Matrix h;
  ProbabilitySchedule p;
  Matrix transition;
  Matrix process_noise;
  Matrix measurement_noise;
};

/// Measurement vector split into independently dropping blocks.
struct PartitionedObsModel {
  struct Block {
    Matrix h;
    double p = 1.0;
  };
  std::vector<Block> blocks;
  Matrix transition;
  Matrix process_noise;
  Matrix measurement_noise;  // over the stacked measurement
};

/// Transition matrix drawn i.i.d. per step from a finite set.
struct MultiModelDynamics {
  MatrixDist transition_dist;
  Matrix h;
  Matrix process_noise;
  Matrix measurement_noise;
};

inline constexpr std::size_t kMaxPartitionBlocks = 20;

/// Builds the H spec from the distribution. With per-model noises the
/// effective covariance is Σ p_i R_ω^i; the H̃x–ω cross term vanishes since
/// every ω^i is zero mean and independent of x.
StepModel build_uncertain_obs(const UncertainObsModel& m, std::size_t k);

/// Two-sample case {h w.p. p(k), 0 w.p. 1 − p(k)}, routed through
/// build_uncertain_obs.
StepModel build_nahi(const NahiModel& m, std::size_t k);

/// Enumerates all 2^B on/off block patterns with product probabilities.
StepModel build_partitioned(const PartitionedObsModel& m, std::size_t k);

/// The stacked 2^B-sample measurement distribution used by build_partitioned.
MatrixDist partitioned_measurement_dist(const PartitionedObsModel& m);

/// Per-block closed form of E(H̃ X H̃ᵀ): block-diagonal with blocks
/// (1 − p_i) p_i h_i X h_iᵀ. O(B) counterpart of the enumeration.
Matrix partitioned_quad_form(const PartitionedObsModel& m, const Matrix& x);

StepModel build_multimodel(const MultiModelDynamics& m, std::size_t k);

/// Wraps a builder and its model into a ModelProvider.
template <typename Model>
ModelProvider make_provider(Model model, StepModel (*builder)(const Model&, std::size_t)) {
  return [model = std::move(model), builder](std::size_t k) { return builder(model, k); };
}

/// Same model with every random matrix replaced by its mean. This is the
/// naive Kalman filter that ignores parameter randomness.
StepModel strip_randomness(const StepModel& m);
ModelProvider naive_provider(ModelProvider provider);

/// Constant provider returning `m` for every k.
ModelProvider constant_provider(StepModel m);

/// 2×2 rotation by 2π/period, [[cos, sin], [−sin, cos]].
Matrix rotation_matrix(double period);

}  // namespace rpkf
