#include "metats/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "metats/errors.hpp"
#include "metats/sampling.hpp"

namespace metats {

double condition_number(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    const auto& values = solver.eigenvalues();
    const double lo = values.cwiseAbs().minCoeff();
    const double hi = values.cwiseAbs().maxCoeff();
    if (lo == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return hi / lo;
}

Eigen::LLT<Matrix> checked_cholesky(const Matrix& a, const char* what) {
    Eigen::LLT<Matrix> llt(a);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
        const Vector diag = llt.matrixLLT().diagonal();
        for (Eigen::Index i = 0; i < diag.size(); ++i) {
            if (!(diag[i] * diag[i] >= kMinCholeskyPivot)) {
                ok = false;
                break;
            }
        }
    }
    if (!ok) {
        std::ostringstream msg;
        msg << what << ": matrix is not numerically positive definite (condition number "
            << condition_number(a) << ")";
        throw NumericalError(msg.str());
    }
    return llt;
}

bool is_symmetric(const Matrix& a, double tolerance) {
    if (a.rows() != a.cols()) {
        return false;
    }
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tolerance;
}

void require_spd(const Matrix& a, const char* what) {
    if (a.rows() == 0 || !is_symmetric(a)) {
        throw DomainError(std::string(what) + ": matrix must be square and symmetric");
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw DomainError(std::string(what) + ": matrix must be positive definite");
    }
}

Vector sample_standard_normal_vector(RngStream& stream, Eigen::Index n) {
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        z[i] = sample_standard_normal(stream);
    }
    return z;
}

Vector sample_mvn_from_precision(RngStream& stream, const Vector& mean,
                                 const Eigen::LLT<Matrix>& precision_factor) {
    // precision = L L^T, so x = mean + L^-T z has covariance precision^-1.
    const Vector z = sample_standard_normal_vector(stream, mean.size());
    return mean + precision_factor.matrixU().solve(z);
}

Vector sample_mvn_from_covariance(RngStream& stream, const Vector& mean, const Matrix& covariance) {
    const Vector z = sample_standard_normal_vector(stream, mean.size());
    Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() == Eigen::Success) {
        return mean + llt.matrixL() * z;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
    const Vector scale = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return mean + solver.eigenvectors() * scale.asDiagonal() * z;
}

}  // namespace metats
