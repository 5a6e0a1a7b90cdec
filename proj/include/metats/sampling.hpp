#pragma once

#include <cstddef>
#include <span>

#include "metats/rng.hpp"

namespace metats {

double sample_uniform(RngStream& stream, double low, double high);

double sample_standard_normal(RngStream& stream);

/// N(mean, variance). Throws DomainError on negative variance.
double sample_gaussian(RngStream& stream, double mean, double variance);

/// Gamma(shape, 1) via Marsaglia-Tsang; shapes below one use the
/// Gamma(shape + 1) * U^(1/shape) boost.
double sample_gamma(RngStream& stream, double shape);

/// Beta(alpha, beta) via the ratio of two Gamma draws, formed in log space so
/// that tiny shapes do not underflow.
double sample_beta(RngStream& stream, double alpha, double beta);

/// 1 with probability p.
int sample_bernoulli(RngStream& stream, double p);

/// Index j with probability weights[j]. Weights must be nonnegative and sum
/// to one within 1e-9.
std::size_t sample_categorical(RngStream& stream, std::span<const double> weights);

/// Throws DomainError unless `weights` is a probability vector.
void validate_probability_vector(std::span<const double> weights, const char* what);

}  // namespace metats
