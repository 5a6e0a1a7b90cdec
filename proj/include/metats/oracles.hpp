#pragma once

// Reference computations that share no code path with the closed-form
// updates they check. Used by the unit tests and by `metats selftest`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "metats/environment.hpp"
#include "metats/linalg.hpp"
#include "metats/meta_posterior.hpp"
#include "metats/posterior.hpp"

namespace metats::oracle {

/// log int_0^1 f(x) dx by tanh-sinh quadrature, where `log_f` returns log f
/// at (x, 1 - x). Both coordinates are passed so neither loses precision near
/// an endpoint.
double log_integrate_unit_interval(const std::function<double(double, double)>& log_f);

/// Meta-posterior weights over Beta-product candidates, with every marginal
/// likelihood obtained by numerical integration against a numerically
/// normalized Beta density.
std::vector<double> categorical_weights_by_quadrature(const CategoricalWeights& meta,
                                                      const TaskLog& log);

/// Per-arm posterior of the prior mean by conditioning the joint Gaussian of
/// (mu_i, y_i1, ..., y_iT) on the observed rewards.
GaussianDiagState gaussian_meta_by_conditioning(const GaussianDiagState& meta, const TaskLog& log);

/// Posterior of theta_0 by conditioning the joint Gaussian of (theta_0, y) with
/// y = X theta_0 + X xi + noise. Returns mean and covariance.
struct GaussianMoments {
    Vector mean;
    Matrix covariance;
};
GaussianMoments linear_meta_by_conditioning(const LinearState& meta, const Matrix& design,
                                            const Vector& rewards);

/// sum_{i=1}^n 1/sqrt(i+a) and sum_{i=1}^n 1/(i+a), smallest terms first in
/// extended precision.
long double root_partial_sum(std::size_t n, double a);
long double harmonic_partial_sum(std::size_t n, double a);

/// max_ij |a - b| / max(1, |b|)
double max_scaled_difference(const Matrix& a, const Matrix& b);

struct SelftestCase {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

/// Oracle-equivalence and property checks: categorical quadrature, Gaussian
/// conditioning, direct vs Woodbury, Gaussian vs linear on identity
/// features, linear conditioning, technical lemmas, Philox known answers and
/// log-gamma.
std::vector<SelftestCase> run_selftest(std::uint64_t seed = 2021);

}  // namespace metats::oracle
