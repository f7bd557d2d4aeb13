#pragma once

#include <cstddef>
#include <functional>

#include "rpkf/linalg.hpp"
#include "rpkf/random_matrix.hpp"

namespace rpkf {

/// Posterior at step k: x̂_{k|k}, P_k and the unconditional second moment
/// X_k = E(x_k x_kᵀ).
struct FilterState {
  std::size_t step = 0;
  Vector mean;
  Matrix cov;
  Matrix second_moment;
};

/// One-step prediction x̂_{k+1|k}, P_{k+1|k}, X_{k+1}.
struct PredictedState {
  std::size_t step = 0;  // index of the predicted step (k + 1)
  Vector mean;
  Matrix cov;
  Matrix second_moment;
};

/// Model for the step ending at k: `transition` is F_{k-1} (moves the
/// state from k-1 to k), `measurement` is H_k, and the noise covariances
/// are R_ν_{k-1} and R_ω_k.
struct StepModel {
  RandomMatrixSpec transition;
  RandomMatrixSpec measurement;
  Matrix process_noise;
  Matrix measurement_noise;

  [[nodiscard]] Eigen::Index state_dim() const { return transition.rows(); }
  [[nodiscard]] Eigen::Index measurement_dim() const { return measurement.rows(); }

  /// Throws InvalidInput on inconsistent dimensions or non-PSD noise.
  void validate() const;
};

/// Per-step model supplier; constant models ignore the argument.
using ModelProvider = std::function<StepModel(std::size_t k)>;

struct InitialCondition {
  Vector mean;
  Matrix cov;
};

enum class CovarianceUpdate {
  kStandard,  // (I − K H̄) P, symmetrized
  kJoseph,    // (I − K H̄) P (I − K H̄)ᵀ + K R_ω̃ Kᵀ
};

struct FilterOptions {
  CovarianceUpdate covariance_update = CovarianceUpdate::kStandard;
};

FilterState init(const InitialCondition& ic);

/// Time update. Adds E(F̃ X F̃ᵀ) to the process noise and propagates the
/// second moment X alongside the mean and covariance.
PredictedState predict(const FilterState& s, const StepModel& m);

/// Measurement update with R_ω̃ = R_ω + E(H̃ X H̃ᵀ) evaluated at the
/// predicted second moment. X is carried over untouched since it does not
/// depend on the data.
FilterState update(const PredictedState& p, const Vector& y, const StepModel& m,
                   const FilterOptions& options = {});

FilterState step(const FilterState& s, const Vector& y, const StepModel& m,
                 const FilterOptions& options = {});

/// Effective process noise R_ν̃ = R_ν + E(F̃ X F̃ᵀ).
Matrix effective_process_noise(const StepModel& m, const Matrix& second_moment);

/// Effective measurement noise R_ω̃ = R_ω + E(H̃ X H̃ᵀ).
Matrix effective_measurement_noise(const StepModel& m, const Matrix& second_moment);

/// Stateful wrapper over init/step driven by a ModelProvider.
class RandomParameterFilter {
 public:
  RandomParameterFilter(ModelProvider model, const InitialCondition& ic,
                        FilterOptions options = {});

  /// Consumes y_{k+1} and returns the new posterior.
  const FilterState& step(const Vector& y);

  [[nodiscard]] const FilterState& state() const { return state_; }

 private:
  ModelProvider model_;
  FilterOptions options_;
  FilterState state_;
};

}  // namespace rpkf
