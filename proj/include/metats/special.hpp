#pragma once

namespace metats {

/// Natural log of the Gamma function for x > 0.
///
/// Stirling series with terms through x^-13 for x >= 10; smaller arguments
/// are shifted up with the recurrence Gamma(x+1) = x Gamma(x). Relative error
/// is a few ulp across (0, 1e6].
double log_gamma(double x);

/// log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b).
double log_beta(double a, double b);

}  // namespace metats
