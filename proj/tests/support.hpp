#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace metats::test {

inline double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

inline double variance_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double sum = 0.0;
    for (double x : xs) sum += (x - m) * (x - m);
    return sum / static_cast<double>(xs.size() - 1);
}

inline std::vector<double> draws(std::size_t count, const std::function<double()>& draw) {
    std::vector<double> out(count);
    for (auto& x : out) x = draw();
    return out;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double worst = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return worst;
}

/// Composite Simpson rule on [lo, hi] with an even number of intervals.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals) {
    const double h = (hi - lo) / intervals;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) {
        sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

}  // namespace metats::test
