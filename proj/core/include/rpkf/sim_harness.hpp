#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rpkf/adapters.hpp"
#include "rpkf/filter_core.hpp"

namespace rpkf {

/// One sampled run of the generative model. `states` holds x_0..x_K,
/// `realized_F[k]` moved x_k to x_{k+1}, while `realized_H[k]` and
/// `measurements[k]` belong to step k + 1 (there is no y_0: the recursion
/// starts from the prior at k = 0).
struct TruthTrajectory {
  std::vector<Vector> states;
  std::vector<Matrix> realized_F;
  std::vector<Matrix> realized_H;
  std::vector<Vector> measurements;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t horizon() const { return measurements.size(); }
};

/// Per-step Monte-Carlo averages for steps 1..K.
struct RunMetrics {
  std::vector<double> per_step_sq_error;  // E_k²
  std::vector<double> per_step_nees;
  std::size_t runs = 0;
};

struct Estimate {
  Vector mean;
  Matrix cov;
};

/// Filter output for steps 1..K together with per-step error statistics.
struct FilterRun {
  std::vector<Estimate> estimates;
  std::vector<double> sq_error;
  std::vector<double> nees;
};

struct Experiment {
  ModelProvider model;
  InitialCondition initial;
  std::size_t horizon = 0;
  FilterOptions options;
};

/// Maps a truth trajectory to estimates for steps 1..K.
using Estimator = std::function<std::vector<Estimate>(const TruthTrajectory&)>;

/// splitmix64 of (base, run): the seed of run `run` in a Monte-Carlo batch.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run);

/// Draws x ~ N(mean, cov) using the PSD square root of cov.
Vector sample_gaussian(const Vector& mean, const Matrix& cov, Rng& rng);

/// Samples x_0 ~ N(μ₀, P₀), then for k = 1..K draws F_{k-1}, ν, H_k, ω in
/// that order and records y_k = H_k x_k + ω_k.
TruthTrajectory simulate_truth(const ModelProvider& model, const InitialCondition& ic,
                               std::size_t horizon, std::uint64_t seed);

double squared_error(const Vector& estimate, const Vector& truth);

/// (x̂ − x)ᵀ P⁺ (x̂ − x)
double nees(const Vector& estimate, const Matrix& cov, const Vector& truth);

FilterRun run_filter_on(const TruthTrajectory& traj, const ModelProvider& model,
                        const InitialCondition& ic, const FilterOptions& options = {});

/// Errors of externally supplied estimates against a trajectory.
FilterRun score(const TruthTrajectory& traj, std::vector<Estimate> estimates);

/// The default estimator: the random-parameter filter on the experiment model.
Estimator filter_estimator(const Experiment& experiment);

/// Runs `runs` independent trajectories seeded by derive_seed(base_seed, i)
/// and averages squared error and NEES per step. The reduction is performed
/// in run order, so results do not depend on `threads`.
RunMetrics monte_carlo(const Experiment& experiment, std::size_t runs, std::uint64_t base_seed,
                       const Estimator& estimator = {}, unsigned threads = 1);

inline constexpr std::size_t kMaxOracleHorizon = 4;

/// Linear-minimum-variance estimate of x_K from y_1..y_K built directly from
/// the joint second moments of the converted system (deterministic means,
/// white effective noises R_ν̃_k, R_ω̃_k). Independent of the recursion; used
/// to certify it. Horizons above kMaxOracleHorizon are rejected.
Estimate batch_lmv_oracle(const ModelProvider& model, const InitialCondition& ic,
                          const std::vector<Vector>& measurements);

/// X_0..X_K from the unconditional second-moment recursion.
std::vector<Matrix> second_moments(const ModelProvider& model, const InitialCondition& ic,
                                   std::size_t horizon);

/// Converted-system noises ν̃_k = x_{k+1} − F̄_k x_k (k = 0..K-1) and
/// ω̃_k = y_k − H̄_k x_k (k = 1..K) recovered from a trajectory.
struct ConvertedNoises {
  std::vector<Vector> process;
  std::vector<Vector> measurement;
};
ConvertedNoises converted_noises(const TruthTrajectory& traj, const ModelProvider& model);

/// Runs the covariance/second-moment recursion only (P_k does not depend on
/// the data) and returns the final posterior covariance.
Matrix covariance_after(const ModelProvider& model, const InitialCondition& ic,
                        std::size_t horizon, const FilterOptions& options = {});

struct SweepPoint {
  double gamma = 0.0;
  double trace_cov = 0.0;
};

/// trace(P_K) for each γ, with the model family built by `family(γ)`.
/// Throws InvalidInput unless gammas are non-empty, ascending and within (0, 1].
std::vector<SweepPoint> gamma_sweep(const std::function<ModelProvider(double)>& family,
                                    const InitialCondition& ic, const std::vector<double>& gammas,
                                    std::size_t horizon);

}  // namespace rpkf
