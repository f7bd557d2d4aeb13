#include "rpkf/sim_harness.hpp"

#include <algorithm>
#include <string>
#include <thread>
#include <utility>

namespace rpkf {

namespace {

Matrix oracle_quad_form(const RandomMatrixSpec& spec, const Matrix& x) {
  // The mixture path when available keeps the oracle off the tensor path
  // used by the recursion.
  if (spec.source()) return quad_form_discrete(*spec.source(), x);
  return quad_form(spec, x);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run) {
  std::uint64_t z = base_seed + 0x9E3779B97F4A7C15ULL * (run + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vector sample_gaussian(const Vector& mean, const Matrix& cov, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  if (cov.isZero(0.0)) return mean;
  return mean + linalg::psd_sqrt(cov) * z;
}

TruthTrajectory simulate_truth(const ModelProvider& model, const InitialCondition& ic,
                               std::size_t horizon, std::uint64_t seed) {
  if (horizon == 0) throw InvalidInput("simulate_truth: horizon must be at least 1");
  if (!model) throw InvalidInput("simulate_truth: empty model provider");
  linalg::require_psd(ic.cov, "simulate_truth: initial covariance");

  Rng rng(seed);
  TruthTrajectory traj;
  traj.seed = seed;
  traj.states.reserve(horizon + 1);
  traj.realized_F.reserve(horizon);
  traj.realized_H.reserve(horizon);
  traj.measurements.reserve(horizon);

  traj.states.push_back(sample_gaussian(ic.mean, ic.cov, rng));
  for (std::size_t k = 1; k <= horizon; ++k) {
    const StepModel m = model(k);
    m.validate();
    const Vector& prev = traj.states.back();
    if (prev.size() != m.state_dim()) {
      throw InvalidInput("simulate_truth: model state dimension changed at step " +
                         std::to_string(k));
    }
    Matrix f = sample_matrix(m.transition, rng);
    const Vector nu = sample_gaussian(Vector::Zero(m.state_dim()), m.process_noise, rng);
    Vector x = f * prev + nu;

    Matrix h = sample_matrix(m.measurement, rng);
    const Vector omega =
        sample_gaussian(Vector::Zero(m.measurement_dim()), m.measurement_noise, rng);
    traj.measurements.push_back(h * x + omega);

    traj.realized_F.push_back(std::move(f));
    traj.realized_H.push_back(std::move(h));
    traj.states.push_back(std::move(x));
  }
  return traj;
}

double squared_error(const Vector& estimate, const Vector& truth) {
  return (estimate - truth).squaredNorm();
}

double nees(const Vector& estimate, const Matrix& cov, const Vector& truth) {
  const Vector e = estimate - truth;
  return e.dot(linalg::pinv_symmetric(cov) * e);
}

FilterRun score(const TruthTrajectory& traj, std::vector<Estimate> estimates) {
  if (estimates.size() != traj.horizon()) {
    throw InvalidInput("score: expected " + std::to_string(traj.horizon()) +
                       " estimates, got " + std::to_string(estimates.size()));
  }
  FilterRun run;
  run.sq_error.reserve(estimates.size());
  run.nees.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Vector& truth = traj.states[i + 1];
    run.sq_error.push_back(squared_error(estimates[i].mean, truth));
    run.nees.push_back(nees(estimates[i].mean, estimates[i].cov, truth));
  }
  run.estimates = std::move(estimates);
  return run;
}

FilterRun run_filter_on(const TruthTrajectory& traj, const ModelProvider& model,
                        const InitialCondition& ic, const FilterOptions& options) {
  RandomParameterFilter filter(model, ic, options);
  std::vector<Estimate> estimates;
  estimates.reserve(traj.horizon());
  for (const Vector& y : traj.measurements) {
    const FilterState& s = filter.step(y);
    estimates.push_back({s.mean, s.cov});
  }
  return score(traj, std::move(estimates));
}

Estimator filter_estimator(const Experiment& experiment) {
  return [experiment](const TruthTrajectory& traj) {
    return run_filter_on(traj, experiment.model, experiment.initial, experiment.options)
        .estimates;
  };
}

RunMetrics monte_carlo(const Experiment& experiment, std::size_t runs, std::uint64_t base_seed,
                       const Estimator& estimator, unsigned threads) {
  if (runs == 0) throw InvalidInput("monte_carlo: runs must be at least 1");
  const Estimator est = estimator ? estimator : filter_estimator(experiment);

  std::vector<FilterRun> results(runs);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < runs; i += stride) {
      const TruthTrajectory traj = simulate_truth(experiment.model, experiment.initial,
                                                  experiment.horizon, derive_seed(base_seed, i));
      results[i] = score(traj, est(traj));
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, runs);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
  }

  RunMetrics metrics;
  metrics.runs = runs;
  metrics.per_step_sq_error.assign(experiment.horizon, 0.0);
  metrics.per_step_nees.assign(experiment.horizon, 0.0);
  for (const FilterRun& r : results) {
    for (std::size_t k = 0; k < experiment.horizon; ++k) {
      metrics.per_step_sq_error[k] += r.sq_error[k];
      metrics.per_step_nees[k] += r.nees[k];
    }
  }
  const double n = static_cast<double>(runs);
  for (std::size_t k = 0; k < experiment.horizon; ++k) {
    metrics.per_step_sq_error[k] /= n;
    metrics.per_step_nees[k] /= n;
  }
  return metrics;
}

Estimate batch_lmv_oracle(const ModelProvider& model, const InitialCondition& ic,
                          const std::vector<Vector>& measurements) {
  const std::size_t horizon = measurements.size();
  if (horizon == 0) throw InvalidInput("batch_lmv_oracle: no measurements");
  if (horizon > kMaxOracleHorizon) {
    throw InvalidInput("batch_lmv_oracle: horizon " + std::to_string(horizon) +
                       " exceeds the limit of " + std::to_string(kMaxOracleHorizon));
  }
  const Eigen::Index r = ic.mean.size();

  std::vector<StepModel> models;
  for (std::size_t k = 1; k <= horizon; ++k) {
    models.push_back(model(k));
    models.back().validate();
  }

  // Effective noise covariances from the second-moment recursion.
  std::vector<Matrix> r_nu;
  std::vector<Matrix> r_omega;
  Matrix x2 = ic.mean * ic.mean.transpose() + ic.cov;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const StepModel& m = models[k - 1];
    const Matrix& f = m.transition.mean();
    const Matrix spread = oracle_quad_form(m.transition, x2);
    r_nu.push_back(m.process_noise + spread);
    x2 = f * x2 * f.transpose() + spread + m.process_noise;
    r_omega.push_back(m.measurement_noise + oracle_quad_form(m.measurement, x2));
  }

  // Z = (x_0, ν̃_0..ν̃_{K-1}, ω̃_1..ω̃_K): mutually uncorrelated blocks.
  std::vector<Eigen::Index> omega_offset(horizon);
  Eigen::Index dim = r * static_cast<Eigen::Index>(horizon + 1);
  for (std::size_t k = 0; k < horizon; ++k) {
    omega_offset[k] = dim;
    dim += models[k].measurement_dim();
  }
  Matrix cov_z = Matrix::Zero(dim, dim);
  Vector mean_z = Vector::Zero(dim);
  cov_z.block(0, 0, r, r) = ic.cov;
  mean_z.head(r) = ic.mean;
  for (std::size_t k = 0; k < horizon; ++k) {
    const Eigen::Index nu_at = r * static_cast<Eigen::Index>(k + 1);
    cov_z.block(nu_at, nu_at, r, r) = r_nu[k];
    const Eigen::Index n = models[k].measurement_dim();
    cov_z.block(omega_offset[k], omega_offset[k], n, n) = r_omega[k];
  }

  // x_k = A_k Z, y_k = H̄_k A_k Z + ω̃_k.
  Eigen::Index total_y = 0;
  for (const auto& m : models) total_y += m.measurement_dim();
  Matrix a = Matrix::Zero(r, dim);
  a.block(0, 0, r, r) = Matrix::Identity(r, r);
  Matrix b = Matrix::Zero(total_y, dim);
  Vector y_stack(total_y);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const StepModel& m = models[k];
    a = m.transition.mean() * a;
    a.block(0, r * static_cast<Eigen::Index>(k + 1), r, r) += Matrix::Identity(r, r);
    const Eigen::Index n = m.measurement_dim();
    if (measurements[k].size() != n) {
      throw InvalidInput("batch_lmv_oracle: measurement " + std::to_string(k + 1) +
                         " has the wrong dimension");
    }
    b.middleRows(row, n) = m.measurement.mean() * a;
    b.block(row, omega_offset[k], n, n) += Matrix::Identity(n, n);
    y_stack.segment(row, n) = measurements[k];
    row += n;
  }

  const Matrix cov_xy = a * cov_z * b.transpose();
  const Matrix cov_yy = b * cov_z * b.transpose();
  const Matrix cov_yy_pinv = cov_yy.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix gain = cov_xy * cov_yy_pinv;

  Estimate out;
  out.mean = a * mean_z + gain * (y_stack - b * mean_z);
  out.cov = linalg::symmetrize(a * cov_z * a.transpose() - gain * cov_xy.transpose());
  return out;
}

std::vector<Matrix> second_moments(const ModelProvider& model, const InitialCondition& ic,
                                   std::size_t horizon) {
  std::vector<Matrix> out;
  out.reserve(horizon + 1);
  FilterState s = init(ic);
  out.push_back(s.second_moment);
  for (std::size_t k = 1; k <= horizon; ++k) {
    const PredictedState p = predict(s, model(k));
    out.push_back(p.second_moment);
    s = {p.step, p.mean, p.cov, p.second_moment};
  }
  return out;
}

ConvertedNoises converted_noises(const TruthTrajectory& traj, const ModelProvider& model) {
  ConvertedNoises out;
  const std::size_t horizon = traj.horizon();
  out.process.reserve(horizon);
  out.measurement.reserve(horizon);
  for (std::size_t k = 1; k <= horizon; ++k) {
    const StepModel m = model(k);
    out.process.push_back(traj.states[k] - m.transition.mean() * traj.states[k - 1]);
    out.measurement.push_back(traj.measurements[k - 1] - m.measurement.mean() * traj.states[k]);
  }
  return out;
}

Matrix covariance_after(const ModelProvider& model, const InitialCondition& ic,
                        std::size_t horizon, const FilterOptions& options) {
  FilterState s = init(ic);
  for (std::size_t k = 1; k <= horizon; ++k) {
    const StepModel m = model(k);
    const PredictedState p = predict(s, m);
    // Zero innovation; the covariance does not depend on y.
    s = update(p, m.measurement.mean() * p.mean, m, options);
  }
  return s.cov;
}

std::vector<SweepPoint> gamma_sweep(const std::function<ModelProvider(double)>& family,
                                    const InitialCondition& ic, const std::vector<double>& gammas,
                                    std::size_t horizon) {
  if (gammas.empty()) throw InvalidInput("gamma_sweep: no gammas given");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0 && gammas[i] <= 1.0)) {
      throw InvalidInput("gamma_sweep: gamma " + std::to_string(gammas[i]) +
                         " must lie in (0, 1]");
    }
    if (i > 0 && gammas[i] < gammas[i - 1]) {
      throw InvalidInput("gamma_sweep: gammas must be sorted ascending");
    }
  }
  std::vector<SweepPoint> out;
  out.reserve(gammas.size());
  for (double g : gammas) {
    out.push_back({g, covariance_after(family(g), ic, horizon).trace()});
  }
  return out;
}

}  // namespace rpkf
