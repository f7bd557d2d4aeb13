#include "rpkf/random_matrix.hpp"

#include <cmath>
#include <string>

namespace rpkf {

namespace {

void require_square_match(const Matrix& x, Eigen::Index inner, const char* where) {
  if (x.rows() != x.cols() || x.rows() != inner) {
    throw InvalidInput(std::string(where) + ": X must be " + std::to_string(inner) + "x" +
                       std::to_string(inner) + ", got " + std::to_string(x.rows()) + "x" +
                       std::to_string(x.cols()));
  }
  if (!linalg::is_symmetric(x, 1e-9)) {
    throw InvalidInput(std::string(where) + ": X must be symmetric");
  }
}

}  // namespace

MatrixDist::MatrixDist(std::vector<Sample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw InvalidInput("MatrixDist: at least one sample is required");
  const Eigen::Index r = samples_.front().value.rows();
  const Eigen::Index c = samples_.front().value.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.value.rows() != r || s.value.cols() != c) {
      throw InvalidInput("MatrixDist: sample " + std::to_string(i) + " is " +
                         std::to_string(s.value.rows()) + "x" + std::to_string(s.value.cols()) +
                         ", expected " + std::to_string(r) + "x" + std::to_string(c));
    }
    if (!s.value.allFinite()) {
      throw InvalidInput("MatrixDist: sample " + std::to_string(i) + " has non-finite entries");
    }
    if (!(s.probability >= 0.0) || s.probability > 1.0) {
      throw InvalidInput("MatrixDist: probability of sample " + std::to_string(i) +
                         " must lie in [0, 1]");
    }
    total += s.probability;
  }
  if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
    throw InvalidInput("MatrixDist: probabilities sum to " + std::to_string(total) +
                       ", expected 1");
  }
}

MatrixDist MatrixDist::deterministic(Matrix value) {
  return MatrixDist({Sample{std::move(value), 1.0}});
}

Matrix MatrixDist::mean() const {
  Matrix m = Matrix::Zero(rows(), cols());
  for (const auto& s : samples_) m += s.probability * s.value;
  return m;
}

CovarianceTensor::CovarianceTensor(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), flat_(Matrix::Zero(rows * cols, rows * cols)) {}

CovarianceTensor::CovarianceTensor(Eigen::Index rows, Eigen::Index cols, Matrix flat)
    : rows_(rows), cols_(cols), flat_(std::move(flat)) {
  const Eigen::Index n = rows * cols;
  if (flat_.rows() != n || flat_.cols() != n) {
    throw InvalidInput("CovarianceTensor: expected a " + std::to_string(n) + "x" +
                       std::to_string(n) + " flattened tensor");
  }
  if (!linalg::is_symmetric(flat_, 1e-12)) {
    throw InvalidInput("CovarianceTensor: not symmetric under pair swap");
  }
  if ((flat_.diagonal().array() < 0.0).any()) {
    throw InvalidInput("CovarianceTensor: negative variance on the diagonal");
  }
}

RandomMatrixSpec::RandomMatrixSpec(Matrix mean, CovarianceTensor dev_cov)
    : mean_(std::move(mean)), dev_cov_(std::move(dev_cov)) {
  if (dev_cov_.rows() != mean_.rows() || dev_cov_.cols() != mean_.cols()) {
    throw InvalidInput("RandomMatrixSpec: covariance tensor shape does not match the mean");
  }
}

RandomMatrixSpec RandomMatrixSpec::deterministic(Matrix value) {
  const Eigen::Index r = value.rows();
  const Eigen::Index c = value.cols();
  return RandomMatrixSpec(std::move(value), CovarianceTensor(r, c));
}

RandomMatrixSpec moments_from_dist(const MatrixDist& dist) {
  const Eigen::Index p = dist.rows();
  const Eigen::Index q = dist.cols();
  const Matrix mean = dist.mean();

  Matrix flat = Matrix::Zero(p * q, p * q);
  for (const auto& s : dist.samples()) {
    const Matrix dev = s.value - mean;
    // Row-major flattening matches the (i·q + j) index convention.
    Vector d(p * q);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < q; ++j) d(i * q + j) = dev(i, j);
    flat.noalias() += s.probability * d * d.transpose();
  }

  RandomMatrixSpec spec(mean, CovarianceTensor(p, q, linalg::symmetrize(flat)));
  spec.source_ = dist;
  return spec;
}

Matrix quad_form(const RandomMatrixSpec& spec, const Matrix& x) {
  require_square_match(x, spec.cols(), "quad_form");
  const Eigen::Index p = spec.rows();
  const Eigen::Index q = spec.cols();
  Matrix out = Matrix::Zero(p, p);
  if (spec.is_deterministic()) return out;

  const CovarianceTensor& c = spec.dev_cov();
  for (Eigen::Index m = 0; m < p; ++m) {
    for (Eigen::Index n = m; n < p; ++n) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j < q; ++j) acc += c(m, i, n, j) * x(i, j);
      out(m, n) = acc;
      out(n, m) = acc;
    }
  }
  return linalg::symmetrize(out);
}

Matrix quad_form_discrete(const MatrixDist& dist, const Matrix& x) {
  require_square_match(x, dist.cols(), "quad_form_discrete");
  const Matrix mean = dist.mean();
  Matrix out = Matrix::Zero(dist.rows(), dist.rows());
  for (const auto& s : dist.samples()) {
    const Matrix dev = s.value - mean;
    out.noalias() += s.probability * dev * x * dev.transpose();
  }
  return linalg::symmetrize(out);
}

const Matrix& sample_matrix(const MatrixDist& dist, Rng& rng) {
  const auto& samples = dist.samples();
  if (samples.size() == 1) return samples.front().value;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  for (const auto& s : samples) {
    cumulative += s.probability;
    if (u < cumulative) return s.value;
  }
  // Σp may round to slightly below one; fall back on the last sample with
  // positive probability.
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    if (it->probability > 0.0) return it->value;
  }
  return samples.back().value;
}

Matrix sample_matrix(const RandomMatrixSpec& spec, Rng& rng) {
  if (spec.source()) return sample_matrix(*spec.source(), rng);
  if (spec.is_deterministic()) return spec.mean();
  throw InvalidInput("sample_matrix: random matrix given only by moments cannot be sampled");
}

}  // namespace rpkf
