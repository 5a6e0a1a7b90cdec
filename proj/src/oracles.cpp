#include "metats/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "metats/bounds.hpp"
#include "metats/rng.hpp"
#include "metats/sampling.hpp"
#include "metats/special.hpp"

namespace metats::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t uniform_index(RngStream& stream, std::size_t low, std::size_t high) {
    return low + static_cast<std::size_t>(stream() % (high - low + 1));
}

Matrix random_spd(RngStream& stream, Eigen::Index d, double ridge) {
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            a(i, j) = sample_uniform(stream, -1.0, 1.0);
        }
    }
    Matrix m = a * a.transpose() + ridge * Matrix::Identity(d, d);
    return 0.5 * (m + m.transpose());
}

Matrix spd_inverse(const Matrix& m) {
    return m.llt().solve(Matrix::Identity(m.rows(), m.cols()));
}

double worst_scaled(const Vector& a, const Vector& b) {
    return max_scaled_difference(Matrix(a), Matrix(b));
}

SelftestCase make_case(std::string name, double worst, double tolerance, std::string detail = {}) {
    SelftestCase c;
    c.name = std::move(name);
    c.worst = worst;
    c.tolerance = tolerance;
    c.passed = std::isfinite(worst) && worst <= tolerance;
    c.detail = std::move(detail);
    return c;
}

SelftestCase categorical_case(std::uint64_t seed) {
    RngStream stream = derive_stream(seed, 0, 1, Lane::kGeneral);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = uniform_index(stream, 2, 4);
        const std::size_t candidates = uniform_index(stream, 2, 4);
        CategoricalWeights meta;
        double total = 0.0;
        for (std::size_t j = 0; j < candidates; ++j) {
            BetaProductPrior prior;
            for (std::size_t i = 0; i < k; ++i) {
                prior.alpha.push_back(sample_uniform(stream, 0.5, 10.0));
                prior.beta.push_back(sample_uniform(stream, 0.5, 10.0));
            }
            meta.priors.push_back(std::move(prior));
            meta.weights.push_back(sample_uniform(stream, 0.1, 1.0));
            total += meta.weights.back();
        }
        for (double& w : meta.weights) w /= total;

        TaskLog log(k);
        const std::size_t rounds = uniform_index(stream, 0, 20);
        for (std::size_t t = 0; t < rounds; ++t) {
            log.record(uniform_index(stream, 0, k - 1), sample_bernoulli(stream, 0.5));
        }
        const auto updated = update_meta_posterior_categorical(meta, log);
        const auto reference = categorical_weights_by_quadrature(meta, log);
        for (std::size_t j = 0; j < candidates; ++j) {
            worst = std::max(worst, std::abs(updated.weights[j] - reference[j]) / reference[j]);
        }
    }
    return make_case("categorical meta-update vs quadrature", worst, 1e-5);
}

SelftestCase gaussian_case(std::uint64_t seed) {
    RngStream stream = derive_stream(seed, 0, 2, Lane::kGeneral);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = uniform_index(stream, 1, 4);
        GaussianDiagState meta;
        meta.mean.resize(static_cast<Eigen::Index>(k));
        meta.variance.resize(static_cast<Eigen::Index>(k));
        for (Eigen::Index i = 0; i < meta.mean.size(); ++i) {
            meta.mean[i] = sample_uniform(stream, -1.0, 1.0);
            meta.variance[i] = sample_uniform(stream, 0.01, 1.0);
        }
        meta.sigma_0 = sample_uniform(stream, 0.05, 1.0);
        meta.sigma = sample_uniform(stream, 0.2, 2.0);
        TaskLog log(k);
        const std::size_t rounds = uniform_index(stream, 0, 20);
        for (std::size_t t = 0; t < rounds; ++t) {
            log.record(uniform_index(stream, 0, k - 1), sample_gaussian(stream, 0.3, 1.0));
        }
        const auto updated = update_meta_posterior_gaussian(meta, log);
        const auto reference = gaussian_meta_by_conditioning(meta, log);
        worst = std::max(worst, worst_scaled(updated.mean, reference.mean));
        worst = std::max(worst, worst_scaled(updated.variance, reference.variance));
    }
    return make_case("gaussian meta-update vs joint conditioning", worst, 1e-10);
}

struct LinearProblem {
    LinearState meta;
    Matrix design;
    Vector rewards;
};

LinearProblem random_linear_problem(RngStream& stream) {
    const auto d = static_cast<Eigen::Index>(uniform_index(stream, 1, 5));
    const auto k = static_cast<Eigen::Index>(uniform_index(stream, 2, 10));
    LinearProblem p;
    p.meta.features.resize(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            p.meta.features(i, j) = sample_uniform(stream, -0.5, 0.5);
        }
    }
    p.meta.mean.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        p.meta.mean[j] = sample_uniform(stream, -1.0, 1.0);
    }
    p.meta.precision = random_spd(stream, d, 0.5);
    p.meta.task_covariance = random_spd(stream, d, 0.05) * 0.1;
    p.meta.sigma = sample_uniform(stream, 0.3, 2.0);
    const auto rounds = static_cast<Eigen::Index>(uniform_index(stream, 1, 30));
    p.design.resize(rounds, d);
    p.rewards.resize(rounds);
    for (Eigen::Index t = 0; t < rounds; ++t) {
        p.design.row(t) = p.meta.features.row(static_cast<Eigen::Index>(
            uniform_index(stream, 0, static_cast<std::size_t>(k) - 1)));
        p.rewards[t] = sample_gaussian(stream, 0.0, 1.0);
    }
    return p;
}

SelftestCase woodbury_case(std::uint64_t seed) {
    RngStream stream = derive_stream(seed, 0, 3, Lane::kGeneral);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const LinearProblem p = random_linear_problem(stream);
        const auto direct =
            update_meta_posterior_linear(p.meta, p.design, p.rewards, LinearUpdate::kDirect);
        const auto woodbury =
            update_meta_posterior_linear(p.meta, p.design, p.rewards, LinearUpdate::kWoodbury);
        worst = std::max(worst, worst_scaled(woodbury.mean, direct.mean));
        worst = std::max(worst, max_scaled_difference(woodbury.precision, direct.precision));
    }
    return make_case("linear meta-update direct vs Woodbury", worst, 1e-8);
}

SelftestCase linear_conditioning_case(std::uint64_t seed) {
    RngStream stream = derive_stream(seed, 0, 4, Lane::kGeneral);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const LinearProblem p = random_linear_problem(stream);
        const auto reference = linear_meta_by_conditioning(p.meta, p.design, p.rewards);
        for (LinearUpdate mode : {LinearUpdate::kDirect, LinearUpdate::kWoodbury}) {
            const auto updated = update_meta_posterior_linear(p.meta, p.design, p.rewards, mode);
            worst = std::max(worst, worst_scaled(updated.mean, reference.mean));
            worst = std::max(worst,
                             max_scaled_difference(spd_inverse(updated.precision), reference.covariance));
        }
    }
    return make_case("linear meta-update vs joint conditioning", worst, 1e-8);
}

SelftestCase identity_features_case(std::uint64_t seed) {
    RngStream stream = derive_stream(seed, 0, 5, Lane::kGeneral);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = uniform_index(stream, 1, 5);
        const auto kk = static_cast<Eigen::Index>(k);
        GaussianDiagState gaussian;
        gaussian.mean.resize(kk);
        gaussian.variance.resize(kk);
        for (Eigen::Index i = 0; i < kk; ++i) {
            gaussian.mean[i] = sample_uniform(stream, -1.0, 1.0);
            gaussian.variance[i] = sample_uniform(stream, 0.01, 1.0);
        }
        gaussian.sigma_0 = sample_uniform(stream, 0.05, 1.0);
        gaussian.sigma = sample_uniform(stream, 0.2, 2.0);

        LinearState linear;
        linear.mean = gaussian.mean;
        linear.precision = gaussian.variance.cwiseInverse().asDiagonal();
        linear.task_covariance = Matrix::Identity(kk, kk) * (gaussian.sigma_0 * gaussian.sigma_0);
        linear.sigma = gaussian.sigma;
        linear.features = Matrix::Identity(kk, kk);

        TaskLog log(k);
        const std::size_t rounds = uniform_index(stream, 0, 20);
        for (std::size_t t = 0; t < rounds; ++t) {
            log.record(uniform_index(stream, 0, k - 1), sample_gaussian(stream, -0.2, 1.0));
        }
        const auto g = update_meta_posterior_gaussian(gaussian, log);
        for (LinearUpdate mode : {LinearUpdate::kDirect, LinearUpdate::kWoodbury}) {
            const auto l = update_meta_posterior_linear(linear, log, mode);
            worst = std::max(worst, worst_scaled(l.mean, g.mean));
            worst = std::max(worst, worst_scaled(spd_inverse(l.precision).diagonal(), g.variance));
        }
    }
    return make_case("gaussian meta-update equals linear on identity features", worst, 1e-10);
}

SelftestCase technical_lemma_case(std::uint64_t seed) {
    const TechnicalLemmaCheck check = check_technical_lemmas(10000, seed);
    std::ostringstream detail;
    detail << check.failures << " failures in " << check.trials << " trials";
    if (!check.first_failure.empty()) {
        detail << "; first: " << check.first_failure;
    }
    double worst = static_cast<double>(check.failures);
    // Spot values from the exact partial sums.
    worst += std::abs(static_cast<double>(root_partial_sum(100, 0.0)) - 18.5896) > 1e-4;
    worst += std::abs(static_cast<double>(harmonic_partial_sum(10, 1.0)) - 2.0198773) > 1e-6;
    return make_case("technical lemma partial sums", worst, 0.0, detail.str());
}

SelftestCase philox_case() {
    const auto zero = philox4x64({1, 0, 0, 0}, {0, 0});
    const std::array<std::uint64_t, 4> zero_expected = {0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL,
                                                        0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL};
    const auto pi = philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL,
                                0x082efa98ec4e6c89ULL},
                               {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
    const std::array<std::uint64_t, 4> pi_expected = {0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL,
                                                      0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL};
    const double mismatches = (zero == zero_expected ? 0.0 : 1.0) + (pi == pi_expected ? 0.0 : 1.0);
    return make_case("philox4x64-10 known answers", mismatches, 0.0);
}

SelftestCase log_gamma_case() {
    double worst = std::abs(log_gamma(0.5) - 0.5 * std::log(kPi));
    for (double x = 1e-3; x < 1e6; x *= 1.37) {
        const double reference = std::lgamma(x);
        worst = std::max(worst, std::abs(log_gamma(x) - reference) / std::max(1.0, std::abs(reference)));
    }
    return make_case("log-gamma vs reference", worst, 1e-10);
}

}  // namespace

double log_integrate_unit_interval(const std::function<double(double, double)>& log_f) {
    // Trapezoid rule in t after x = 1 / (1 + exp(-pi sinh t)).
    constexpr double step = 1.0 / 32.0;
    constexpr int half_width = 144;  // t in [-4.5, 4.5]
    std::vector<double> terms;
    terms.reserve(2 * half_width + 1);
    for (int k = -half_width; k <= half_width; ++k) {
        const double t = k * step;
        const double u = kPi * std::sinh(t);
        const double log_x = -std::log1p(std::exp(-u));
        const double log_1mx = -std::log1p(std::exp(u));
        const double x = std::exp(log_x);
        const double one_minus_x = std::exp(log_1mx);
        if (x <= 0.0 || one_minus_x <= 0.0) {
            continue;
        }
        const double log_jacobian = std::log(kPi * std::cosh(t)) + log_x + log_1mx;
        terms.push_back(log_f(x, one_minus_x) + log_jacobian);
    }
    const double peak = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double term : terms) {
        sum += std::exp(term - peak);
    }
    return peak + std::log(sum * step);
}

std::vector<double> categorical_weights_by_quadrature(const CategoricalWeights& meta,
                                                      const TaskLog& log) {
    const std::size_t k = meta.priors.front().arms();
    std::vector<double> ones(k, 0.0);
    std::vector<double> zeros(k, 0.0);
    for (const auto& round : log.rounds()) {
        (round.reward == 1.0 ? ones : zeros)[round.arm] += 1.0;
    }
    auto log_beta_integral = [](double p, double q) {
        return log_integrate_unit_interval([p, q](double x, double one_minus_x) {
            return p * std::log(x) + q * std::log(one_minus_x);
        });
    };

    std::vector<double> log_post(meta.priors.size());
    for (std::size_t j = 0; j < meta.priors.size(); ++j) {
        double value = std::log(meta.weights[j]);
        for (std::size_t i = 0; i < k; ++i) {
            const double a = meta.priors[j].alpha[i] - 1.0;
            const double b = meta.priors[j].beta[i] - 1.0;
            value += log_beta_integral(a + ones[i], b + zeros[i]) - log_beta_integral(a, b);
        }
        log_post[j] = value;
    }
    const double peak = *std::max_element(log_post.begin(), log_post.end());
    double total = 0.0;
    for (double& v : log_post) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : log_post) v /= total;
    return log_post;
}

GaussianDiagState gaussian_meta_by_conditioning(const GaussianDiagState& meta, const TaskLog& log) {
    GaussianDiagState out = meta;
    const double noise = meta.sigma * meta.sigma;
    const double task_var = meta.sigma_0 * meta.sigma_0;
    for (std::size_t arm = 0; arm < log.arms(); ++arm) {
        std::vector<double> ys;
        for (const auto& round : log.rounds()) {
            if (round.arm == arm) ys.push_back(round.reward);
        }
        if (ys.empty()) continue;
        const auto t = static_cast<Eigen::Index>(ys.size());
        const auto i = static_cast<Eigen::Index>(arm);
        const double m = meta.mean[i];
        const double v = meta.variance[i];
        const Matrix cov = noise * Matrix::Identity(t, t) + (v + task_var) * Matrix::Ones(t, t);
        Vector centered(t);
        for (Eigen::Index r = 0; r < t; ++r) centered[r] = ys[static_cast<std::size_t>(r)] - m;
        const Eigen::LDLT<Matrix> factor(cov);
        const Vector ones = Vector::Ones(t);
        out.mean[i] = m + v * ones.dot(factor.solve(centered));
        out.variance[i] = v - v * v * ones.dot(factor.solve(ones));
    }
    return out;
}

GaussianMoments linear_meta_by_conditioning(const LinearState& meta, const Matrix& design,
                                            const Vector& rewards) {
    const Matrix prior_cov = spd_inverse(meta.precision);
    const auto n = design.rows();
    const Matrix marginal = design * (prior_cov + meta.task_covariance) * design.transpose() +
                            meta.sigma * meta.sigma * Matrix::Identity(n, n);
    const Eigen::LDLT<Matrix> factor(marginal);
    const Matrix gain = prior_cov * design.transpose();  // Cov(theta_0, y)
    GaussianMoments out;
    out.mean = meta.mean + gain * factor.solve(rewards - design * meta.mean);
    out.covariance = prior_cov - gain * factor.solve(gain.transpose());
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

long double root_partial_sum(std::size_t n, double a) {
    long double sum = 0.0L;
    for (std::size_t i = n; i >= 1; --i) {
        sum += 1.0L / std::sqrt(static_cast<long double>(i) + a);
    }
    return sum;
}

long double harmonic_partial_sum(std::size_t n, double a) {
    long double sum = 0.0L;
    for (std::size_t i = n; i >= 1; --i) {
        sum += 1.0L / (static_cast<long double>(i) + a);
    }
    return sum;
}

double max_scaled_difference(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double diff = std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(b(i, j)));
            if (std::isnan(diff)) {
                return std::numeric_limits<double>::infinity();
            }
            worst = std::max(worst, diff);
        }
    }
    return worst;
}

std::vector<SelftestCase> run_selftest(std::uint64_t seed) {
    return {
        categorical_case(seed),
        gaussian_case(seed),
        woodbury_case(seed),
        identity_features_case(seed),
        linear_conditioning_case(seed),
        technical_lemma_case(seed),
        philox_case(),
        log_gamma_case(),
    };
}

}  // namespace metats::oracle
