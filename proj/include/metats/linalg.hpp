#pragma once

#include <Eigen/Dense>

#include "metats/rng.hpp"

namespace metats {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Smallest Cholesky pivot accepted before a solve is refused.
inline constexpr double kMinCholeskyPivot = 1e-12;

/// Cholesky factorization that throws NumericalError (naming `what` and the
/// matrix condition number) when the matrix is not numerically positive
/// definite.
Eigen::LLT<Matrix> checked_cholesky(const Matrix& a, const char* what);

/// 2-norm condition number from the symmetric eigenvalues.
double condition_number(const Matrix& a);

bool is_symmetric(const Matrix& a, double tolerance = 1e-12);

/// Throws DomainError unless `a` is square, symmetric within 1e-12 and
/// Cholesky-factorizable.
void require_spd(const Matrix& a, const char* what);

/// Standard normal vector of length n.
Vector sample_standard_normal_vector(RngStream& stream, Eigen::Index n);

/// N(mean, precision^-1) given the Cholesky factor of the precision.
Vector sample_mvn_from_precision(RngStream& stream, const Vector& mean,
                                 const Eigen::LLT<Matrix>& precision_factor);

/// N(mean, covariance) for a symmetric positive semi-definite covariance.
/// Singular covariances (e.g. the zero matrix) fall back to a symmetric
/// eigendecomposition with negative eigenvalues clamped to zero.
Vector sample_mvn_from_covariance(RngStream& stream, const Vector& mean, const Matrix& covariance);

}  // namespace metats
