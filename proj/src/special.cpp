#include "metats/special.hpp"

#include <cmath>
#include <numbers>

#include "metats/errors.hpp"

namespace metats {

namespace {

constexpr double kStirlingShift = 10.0;

// B_{2k} / (2k (2k - 1)) for k = 1..7
constexpr double kStirling[] = {
    1.0 / 12.0,  -1.0 / 360.0,          1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0, -691.0 / 360360.0,     1.0 / 156.0,
};

double stirling(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    for (int k = 6; k >= 0; --k) {
        series = series * inv2 + kStirling[k];
    }
    series *= inv;
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return (x - 0.5) * std::log(x) - x + half_log_two_pi + series;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("log_gamma: argument must be positive and finite");
    }
    if (x >= kStirlingShift) {
        return stirling(x);
    }
    // x (x+1) ... (x+k-1) stays far from overflow for k <= 10.
    double product = 1.0;
    double shifted = x;
    while (shifted < kStirlingShift) {
        product *= shifted;
        shifted += 1.0;
    }
    return stirling(shifted) - std::log(product);
}

double log_beta(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace metats
