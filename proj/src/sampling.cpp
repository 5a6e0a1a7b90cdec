#include "metats/sampling.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "metats/errors.hpp"

namespace metats {

namespace {

// log of a Gamma(shape, 1) draw. For shape < 1 the boost factor U^(1/shape)
// is applied additively so the result stays finite for any shape > 0.
double sample_log_gamma_variate(RngStream& stream, double shape) {
    if (shape < 1.0) {
        const double boosted = sample_gamma(stream, shape + 1.0);
        return std::log(boosted) + std::log(stream.uniform_open()) / shape;
    }
    return std::log(sample_gamma(stream, shape));
}

}  // namespace

double sample_uniform(RngStream& stream, double low, double high) {
    return low + (high - low) * stream.uniform();
}

double sample_standard_normal(RngStream& stream) {
    // Box-Muller, one output per pair of words.
    const double u1 = stream.uniform_open();
    const double u2 = stream.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gaussian(RngStream& stream, double mean, double variance) {
    if (!(variance >= 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
        throw DomainError("sample_gaussian: variance must be finite and nonnegative");
    }
    const double z = sample_standard_normal(stream);
    if (variance == 0.0) {
        return mean;
    }
    return mean + std::sqrt(variance) * z;
}

double sample_gamma(RngStream& stream, double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw DomainError("sample_gamma: shape must be positive");
    }
    if (shape < 1.0) {
        const double boosted = sample_gamma(stream, shape + 1.0);
        return boosted * std::pow(stream.uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = sample_standard_normal(stream);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = stream.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double sample_beta(RngStream& stream, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw DomainError("sample_beta: shapes must be positive");
    }
    const double log_x = sample_log_gamma_variate(stream, alpha);
    const double log_y = sample_log_gamma_variate(stream, beta);
    // x / (x + y) = 1 / (1 + exp(log_y - log_x))
    return 1.0 / (1.0 + std::exp(log_y - log_x));
}

int sample_bernoulli(RngStream& stream, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("sample_bernoulli: p must lie in [0, 1]");
    }
    return stream.uniform() < p ? 1 : 0;
}

void validate_probability_vector(std::span<const double> weights, const char* what) {
    if (weights.empty()) {
        throw DomainError(std::string(what) + ": empty probability vector");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError(std::string(what) + ": weights must be finite and nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw DomainError(std::string(what) + ": weights must sum to 1");
    }
}

std::size_t sample_categorical(RngStream& stream, std::span<const double> weights) {
    validate_probability_vector(weights, "sample_categorical");
    const double u = stream.uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] <= 0.0) {
            continue;
        }
        last_positive = j;
        cumulative += weights[j];
        if (u < cumulative) {
            return j;
        }
    }
    return last_positive;
}

}  // namespace metats
