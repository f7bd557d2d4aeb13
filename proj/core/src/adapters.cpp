#include "rpkf/adapters.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace rpkf {

namespace {

void require_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidInput(what + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

StepModel build_uncertain_obs(const UncertainObsModel& m, std::size_t /*k*/) {
  const auto& samples = m.measurement_dist.samples();
  Matrix noise;
  if (m.per_model_noise.empty()) {
    noise = m.measurement_noise;
  } else {
    if (m.per_model_noise.size() != samples.size()) {
      throw InvalidInput("build_uncertain_obs: " + std::to_string(m.per_model_noise.size()) +
                         " measurement noises for " + std::to_string(samples.size()) +
                         " measurement models");
    }
    const Eigen::Index n = m.measurement_dist.rows();
    noise = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Matrix& r = m.per_model_noise[i];
      if (r.rows() != n || r.cols() != n) {
        throw InvalidInput("build_uncertain_obs: measurement noise " + std::to_string(i) +
                           " has the wrong shape");
      }
      linalg::require_psd(r, "build_uncertain_obs: measurement noise " + std::to_string(i));
      noise += samples[i].probability * r;
    }
  }

  StepModel out{m.transition, moments_from_dist(m.measurement_dist), m.process_noise,
                linalg::symmetrize(noise)};
  out.validate();
  return out;
}

StepModel build_nahi(const NahiModel& m, std::size_t k) {
  if (!m.p) throw InvalidInput("build_nahi: missing probability schedule");
  const double p = m.p(k);
  require_probability(p, "build_nahi: p(" + std::to_string(k) + ")");

  UncertainObsModel general{
      MatrixDist({{m.h, p}, {Matrix::Zero(m.h.rows(), m.h.cols()), 1.0 - p}}),
      {},
      m.measurement_noise,
      RandomMatrixSpec::deterministic(m.transition),
      m.process_noise,
  };
  return build_uncertain_obs(general, k);
}

MatrixDist partitioned_measurement_dist(const PartitionedObsModel& m) {
  const std::size_t blocks = m.blocks.size();
  if (blocks == 0) throw InvalidInput("build_partitioned: at least one block is required");
  if (blocks > kMaxPartitionBlocks) {
    throw InvalidInput("build_partitioned: " + std::to_string(blocks) +
                       " blocks exceeds the limit of " + std::to_string(kMaxPartitionBlocks));
  }
  const Eigen::Index cols = m.blocks.front().h.cols();
  Eigen::Index rows = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto& blk = m.blocks[b];
    if (blk.h.cols() != cols) {
      throw InvalidInput("build_partitioned: block " + std::to_string(b) +
                         " has a different column count");
    }
    require_probability(blk.p, "build_partitioned: block " + std::to_string(b) + " probability");
    rows += blk.h.rows();
  }

  std::vector<MatrixDist::Sample> samples;
  samples.reserve(std::size_t{1} << blocks);
  for (std::size_t mask = 0; mask < (std::size_t{1} << blocks); ++mask) {
    Matrix stacked = Matrix::Zero(rows, cols);
    double prob = 1.0;
    Eigen::Index offset = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto& blk = m.blocks[b];
      if (mask & (std::size_t{1} << b)) {
        stacked.middleRows(offset, blk.h.rows()) = blk.h;
        prob *= blk.p;
      } else {
        prob *= 1.0 - blk.p;
      }
      offset += blk.h.rows();
    }
    samples.push_back({std::move(stacked), prob});
  }
  return MatrixDist(std::move(samples));
}

StepModel build_partitioned(const PartitionedObsModel& m, std::size_t k) {
  MatrixDist dist = partitioned_measurement_dist(m);
  if (m.measurement_noise.rows() != dist.rows() || m.measurement_noise.cols() != dist.rows()) {
    throw InvalidInput("build_partitioned: measurement noise must be " +
                       std::to_string(dist.rows()) + "x" + std::to_string(dist.rows()) +
                       " to match the stacked blocks");
  }
  UncertainObsModel general{std::move(dist), {}, m.measurement_noise,
                            RandomMatrixSpec::deterministic(m.transition), m.process_noise};
  return build_uncertain_obs(general, k);
}

Matrix partitioned_quad_form(const PartitionedObsModel& m, const Matrix& x) {
  Eigen::Index rows = 0;
  for (const auto& blk : m.blocks) rows += blk.h.rows();
  Matrix out = Matrix::Zero(rows, rows);
  Eigen::Index offset = 0;
  for (const auto& blk : m.blocks) {
    const Eigen::Index n = blk.h.rows();
    out.block(offset, offset, n, n) = (1.0 - blk.p) * blk.p * blk.h * x * blk.h.transpose();
    offset += n;
  }
  return linalg::symmetrize(out);
}

StepModel build_multimodel(const MultiModelDynamics& m, std::size_t /*k*/) {
  if (m.transition_dist.rows() != m.transition_dist.cols()) {
    throw InvalidInput("build_multimodel: transition matrices must be square");
  }
  StepModel out{moments_from_dist(m.transition_dist), RandomMatrixSpec::deterministic(m.h),
                m.process_noise, m.measurement_noise};
  out.validate();
  return out;
}

StepModel strip_randomness(const StepModel& m) {
  return StepModel{RandomMatrixSpec::deterministic(m.transition.mean()),
                   RandomMatrixSpec::deterministic(m.measurement.mean()), m.process_noise,
                   m.measurement_noise};
}

ModelProvider naive_provider(ModelProvider provider) {
  return [provider = std::move(provider)](std::size_t k) {
    return strip_randomness(provider(k));
  };
}

ModelProvider constant_provider(StepModel m) {
  m.validate();
  return [m = std::move(m)](std::size_t) { return m; };
}

Matrix rotation_matrix(double period) {
  if (!(period != 0.0) || !std::isfinite(period)) {
    throw InvalidInput("rotation_matrix: period must be finite and non-zero");
  }
  const double angle = 2.0 * std::numbers::pi / period;
  Matrix r(2, 2);
  r << std::cos(angle), std::sin(angle), -std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace rpkf
