#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rpkf/linalg.hpp"

namespace rpkf {

/// Deterministic, seedable generator used everywhere a draw is needed.
using Rng = std::mt19937_64;

/// Tolerance on Σp = 1 for finite distributions.
inline constexpr double kProbabilitySumTolerance = 1e-12;

/// A finite distribution over equally-shaped matrices.
class MatrixDist {
 public:
  struct Sample {
    Matrix value;
    double probability = 0.0;
  };

  /// Throws InvalidInput on an empty list, mismatched shapes, a negative
  /// probability, or probabilities not summing to one.
  explicit MatrixDist(std::vector<Sample> samples);

  static MatrixDist deterministic(Matrix value);

  [[nodiscard]] Eigen::Index rows() const { return samples_.front().value.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return samples_.front().value.cols(); }
  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] const std::vector<Sample>& samples() const { return samples_; }

  /// Σ p_i M_i
  [[nodiscard]] Matrix mean() const;

 private:
  std::vector<Sample> samples_;
};

/// Covariance of the entries of a p×q random matrix, stored densely as a
/// (p·q)×(p·q) matrix whose (i·q+j, m·q+n) entry is Cov(m_ij, m_mn).
class CovarianceTensor {
 public:
  CovarianceTensor() = default;
  CovarianceTensor(Eigen::Index rows, Eigen::Index cols);  // zero tensor
  /// Throws InvalidInput unless `flat` is (rows·cols)² and pair-swap
  /// symmetric with a non-negative diagonal.
  CovarianceTensor(Eigen::Index rows, Eigen::Index cols, Matrix flat);

  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index m,
                                  Eigen::Index n) const {
    return flat_(i * cols_ + j, m * cols_ + n);
  }
  [[nodiscard]] Eigen::Index rows() const { return rows_; }
  [[nodiscard]] Eigen::Index cols() const { return cols_; }
  [[nodiscard]] const Matrix& flat() const { return flat_; }
  [[nodiscard]] bool is_zero() const { return flat_.size() == 0 || flat_.isZero(0.0); }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Matrix flat_;
};

/// Random matrix described by its mean and entrywise deviation covariance.
/// When built from a finite distribution, the distribution is retained so
/// the mixture path and the sampler can use it.
class RandomMatrixSpec {
 public:
  RandomMatrixSpec() = default;
  RandomMatrixSpec(Matrix mean, CovarianceTensor dev_cov);

  static RandomMatrixSpec deterministic(Matrix value);

  [[nodiscard]] const Matrix& mean() const { return mean_; }
  [[nodiscard]] const CovarianceTensor& dev_cov() const { return dev_cov_; }
  [[nodiscard]] const std::optional<MatrixDist>& source() const { return source_; }
  [[nodiscard]] Eigen::Index rows() const { return mean_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return mean_.cols(); }
  [[nodiscard]] bool is_deterministic() const { return dev_cov_.is_zero(); }

 private:
  friend RandomMatrixSpec moments_from_dist(const MatrixDist& dist);

  Matrix mean_;
  CovarianceTensor dev_cov_;
  std::optional<MatrixDist> source_;
};

/// Mean Σ p_j M_j and deviation covariance Σ p_t (M_t − M̄)_ij (M_t − M̄)_mn.
RandomMatrixSpec moments_from_dist(const MatrixDist& dist);

/// E(M̃ X M̃ᵀ) from the covariance tensor:
///   out(m, n) = Σ_i Σ_j Cov(m̃_mi, m̃_nj) X_ij.
/// The result is symmetrized.
Matrix quad_form(const RandomMatrixSpec& spec, const Matrix& x);

/// E(M̃ X M̃ᵀ) as the mixture Σ_i p_i (M_i − M̄) X (M_i − M̄)ᵀ.
Matrix quad_form_discrete(const MatrixDist& dist, const Matrix& x);

/// Draws sample i with probability p_i.
const Matrix& sample_matrix(const MatrixDist& dist, Rng& rng);

/// Realization of a spec: the mean when deterministic, otherwise a draw
/// from its source distribution. Throws InvalidInput for a random spec
/// given only by moments.
Matrix sample_matrix(const RandomMatrixSpec& spec, Rng& rng);

}  // namespace rpkf
