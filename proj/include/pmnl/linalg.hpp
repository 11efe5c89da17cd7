#pragma once

#include <Eigen/Dense>

namespace pmnl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Smallest eigenvalue of a symmetric matrix (0 for an empty matrix).
double min_eigenvalue(const Mat& symmetric);

/// Largest eigenvalue of a symmetric matrix (0 for an empty matrix).
double max_eigenvalue(const Mat& symmetric);

/// Relative ridge added before any inversion: 1e-10 * trace / d.
double ridge_for(const Mat& symmetric);

/// (A + ridge I)^{-1/2} for symmetric PSD A.
Mat inverse_sqrt(const Mat& symmetric);

/// (A + ridge I)^{-1} for symmetric PSD A.
Mat inverse_psd(const Mat& symmetric);

/// Largest-magnitude deviation from symmetry.
double asymmetry(const Mat& m);

}  // namespace pmnl
