#include "pmnl/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace pmnl {

double min_eigenvalue(const Mat& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Mat& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double ridge_for(const Mat& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  const double tr = std::max(symmetric.trace(), 0.0);
  return 1e-10 * tr / static_cast<double>(symmetric.rows());
}

Mat inverse_sqrt(const Mat& symmetric) {
  const Eigen::Index d = symmetric.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric);
  const double ridge = ridge_for(symmetric);
  Vec scale(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    scale(i) = 1.0 / std::sqrt(std::max(es.eigenvalues()(i), 0.0) + ridge);
  }
  return es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
}

Mat inverse_psd(const Mat& symmetric) {
  const Eigen::Index d = symmetric.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric);
  const double ridge = ridge_for(symmetric);
  Vec scale(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    scale(i) = 1.0 / (std::max(es.eigenvalues()(i), 0.0) + ridge);
  }
  return es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
}

double asymmetry(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace pmnl
