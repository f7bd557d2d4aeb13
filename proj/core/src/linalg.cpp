#include "rpkf/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace rpkf::linalg {

Matrix symmetrize(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_psd(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if (!m.allFinite() || !is_symmetric(m, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, std::abs(m.trace()));
  return eig.eigenvalues().minCoeff() >= -tol * scale;
}

void require_psd(const Matrix& m, const std::string& what, double tol) {
  if (m.rows() != m.cols()) {
    throw InvalidInput(what + " must be square, got " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()));
  }
  if (!is_psd(m, tol)) {
    throw InvalidInput(what + " must be symmetric positive semidefinite");
  }
}

Matrix pinv_symmetric(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s));
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(lambda.size());
  if (lmax > 0.0) {
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) > kPinvRelativeCutoff * lmax) inv(i) = 1.0 / lambda(i);
    }
  }
  const Matrix& v = eig.eigenvectors();
  return symmetrize(v * inv.asDiagonal() * v.transpose());
}

Matrix pinv(const Matrix& a) {
  if (a.size() == 0) return Matrix(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kPinvRelativeCutoff * smax) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix right_solve_psd(const Matrix& b, const Matrix& s) {
  const Matrix sym = symmetrize(s);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
  const double lmin = lambda.size() > 0 ? lambda.minCoeff() : 0.0;
  if (lmax > 0.0 && lmin > 0.0 && lmax / lmin < kMaxConditionForSolve) {
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() == Eigen::Success) {
      // B·S⁻¹ = (S⁻¹·Bᵀ)ᵀ
      return llt.solve(b.transpose()).transpose();
    }
  }
  return b * pinv_symmetric(sym);
}

Matrix psd_sqrt(const Matrix& s) {
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

double relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("relative_error: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace rpkf::linalg
