#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "metats/errors.hpp"
#include "metats/rng.hpp"
#include "metats/sampling.hpp"
#include "metats/special.hpp"
#include "support.hpp"

using namespace metats;
using metats::test::draws;
using metats::test::ks_statistic;
using metats::test::mean_of;
using metats::test::variance_of;

namespace {

constexpr std::size_t kDraws = 100000;

// 1% critical value of the two-sample KS statistic for equal sample sizes.
double ks_critical_1pct(std::size_t n) {
    return 1.628 * std::sqrt(2.0 / static_cast<double>(n));
}

}  // namespace

TEST_SUITE("rng") {
    TEST_CASE("philox4x64-10 matches the Random123 known-answer vectors") {
        const auto a = philox4x64({1, 0, 0, 0}, {0, 0});
        CHECK(a[0] == 0x02f4ba6408e4d89bULL);
        CHECK(a[1] == 0x3dd62b0b9ca8c5b2ULL);
        CHECK(a[2] == 0x1c8667a55d902e79ULL);
        CHECK(a[3] == 0x907d7a052fd5b4dcULL);

        const auto b = philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL,
                                   0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                                  {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
        CHECK(b[0] == 0xa528f45403e61d95ULL);
        CHECK(b[1] == 0x38c72dbd566e9788ULL);
        CHECK(b[2] == 0xa5a1610e72fd18b5ULL);
        CHECK(b[3] == 0x57bd43b5e52b7fe6ULL);
    }

    TEST_CASE("same key gives the same first 100 draws") {
        RngStream a = derive_stream(7, 0, 0);
        RngStream b = derive_stream(7, 0, 0);
        for (int i = 0; i < 100; ++i) {
            REQUIRE(a() == b());
        }
        CHECK(a == b);
        CHECK(a.counter() == 100);
    }

    TEST_CASE("different run or task gives a different first draw") {
        CHECK(derive_stream(7, 0, 0)() != derive_stream(7, 1, 0)());
        CHECK(derive_stream(7, 0, 0)() != derive_stream(7, 0, 1)());
        CHECK(derive_stream(7, 0, 0)() != derive_stream(8, 0, 0)());
        CHECK(derive_stream(7, 0, 0, Lane::kRewardNoise)() !=
              derive_stream(7, 0, 0, Lane::kEnvironmentInstance)());
    }

    TEST_CASE("a stream does not depend on which other streams were consumed first") {
        RngStream fresh = derive_stream(7, 0, 3);
        std::vector<std::uint64_t> expected;
        for (int i = 0; i < 50; ++i) expected.push_back(fresh());

        for (std::uint64_t task = 0; task < 3; ++task) {
            RngStream other = derive_stream(7, 0, task);
            for (int i = 0; i < 1000; ++i) other();
        }
        RngStream later = derive_stream(7, 0, 3);
        for (int i = 0; i < 50; ++i) {
            REQUIRE(later() == expected[static_cast<std::size_t>(i)]);
        }
    }

    TEST_CASE("streams for neighbouring runs are uncorrelated") {
        RngStream a = derive_stream(2021, 0, 0);
        RngStream b = derive_stream(2021, 1, 0);
        RngStream c = derive_stream(2021, 0, 1);
        const auto xa = draws(kDraws, [&] { return a.uniform(); });
        const auto xb = draws(kDraws, [&] { return b.uniform(); });
        const auto xc = draws(kDraws, [&] { return c.uniform(); });
        auto correlation = [](const std::vector<double>& x, const std::vector<double>& y) {
            const double mx = mean_of(x);
            const double my = mean_of(y);
            double sxy = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my);
            return sxy / static_cast<double>(x.size() - 1) / std::sqrt(variance_of(x) * variance_of(y));
        };
        const double bound = 5.0 / std::sqrt(static_cast<double>(kDraws));
        CHECK(std::abs(correlation(xa, xb)) < bound);
        CHECK(std::abs(correlation(xa, xc)) < bound);
        CHECK(std::abs(correlation(xb, xc)) < bound);
        CHECK(mean_of(xa) == doctest::Approx(0.5).epsilon(0.01));
    }

    TEST_CASE("uniform ranges") {
        RngStream s = derive_stream(1, 2, 3);
        for (int i = 0; i < 10000; ++i) {
            const double u = s.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            const double v = s.uniform_open();
            REQUIRE(v > 0.0);
            REQUIRE(v < 1.0);
        }
    }

    TEST_CASE("agent lanes never collide with environment lanes") {
        const auto oracle = agent_lane("OracleTS");
        const auto meta = agent_lane("MetaTS");
        CHECK(oracle != meta);
        CHECK((oracle >> 63) == 1);
        CHECK((meta >> 63) == 1);
        CHECK(agent_lane("TS") == agent_lane("TS"));
    }
}

TEST_SUITE("log_gamma") {
    TEST_CASE("known values") {
        CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(std::abs(log_gamma(2.0)) < 1e-14);
        // Factorial oracle: Gamma(4) = 3!
        CHECK(std::abs(log_gamma(4.0) - std::log(1.0 * 2.0 * 3.0)) < 1e-12);
    }

    TEST_CASE("log_gamma(1/2) matches the numerically integrated Gamma integral") {
        // Gamma(1/2) = int_0^inf t^(-1/2) e^(-t) dt = 2 int_0^inf e^(-u^2) du
        const double integral =
            2.0 * test::simpson([](double u) { return std::exp(-u * u); }, 0.0, 12.0, 24000);
        CHECK(std::abs(log_gamma(0.5) - std::log(integral)) < 1e-12);
        CHECK(std::abs(log_gamma(0.5) - 0.5723649429247001) < 1e-12);
    }

    TEST_CASE("factorials up to 170") {
        double log_factorial = 0.0;
        for (int n = 1; n <= 170; ++n) {
            // log_gamma(n + 1) = log n!
            log_factorial += std::log(static_cast<double>(n));
            REQUIRE(std::abs(log_gamma(n + 1.0) - log_factorial) <=
                    1e-10 * std::max(1.0, log_factorial));
        }
    }

    TEST_CASE("relative accuracy against the C library on [0.1, 1e6]") {
        for (double x = 0.1; x <= 1e6; x *= 1.013) {
            const double ref = std::lgamma(x);
            REQUIRE(std::abs(log_gamma(x) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
        }
    }

    TEST_CASE("recurrence log_gamma(x+1) = log_gamma(x) + log x") {
        RngStream s = derive_stream(11, 0, 0);
        for (int i = 0; i < 10000; ++i) {
            const double x = sample_uniform(s, 0.1, 1000.0);
            REQUIRE(std::abs(log_gamma(x + 1.0) - log_gamma(x) - std::log(x)) < 1e-9);
        }
    }

    TEST_CASE("domain errors") {
        CHECK_THROWS_AS(log_gamma(0.0), DomainError);
        CHECK_THROWS_AS(log_gamma(-1.5), DomainError);
        CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::quiet_NaN()), DomainError);
        CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::infinity()), DomainError);
    }

    TEST_CASE("log_beta") {
        CHECK(std::abs(log_beta(2.0, 3.0) - std::log(1.0 / 12.0)) < 1e-13);
        CHECK(log_beta(6.0, 2.0) == doctest::Approx(log_beta(2.0, 6.0)).epsilon(1e-15));
    }
}

TEST_SUITE("samplers") {
    TEST_CASE("gaussian") {
        RngStream s = derive_stream(3, 0, 0);
        CHECK(sample_gaussian(s, 2.5, 0.0) == 2.5);
        const auto standard = draws(kDraws, [&] { return sample_gaussian(s, 0.0, 1.0); });
        CHECK(std::abs(mean_of(standard)) < 0.02);
        const auto wide = draws(kDraws, [&] { return sample_gaussian(s, 0.0, 4.0); });
        CHECK(std::abs(variance_of(wide) - 4.0) < 0.15);
        CHECK_THROWS_AS(sample_gaussian(s, 0.0, -1.0), DomainError);
    }

    TEST_CASE("gamma moments") {
        RngStream s = derive_stream(3, 0, 1);
        for (double shape : {0.3, 1.0, 3.0, 40.0}) {
            const auto xs = draws(kDraws, [&] { return sample_gamma(s, shape); });
            const double se = std::sqrt(shape / static_cast<double>(kDraws));
            CHECK(std::abs(mean_of(xs) - shape) < 5.0 * se);
            CHECK(variance_of(xs) == doctest::Approx(shape).epsilon(0.05));
        }
        CHECK_THROWS_AS(sample_gamma(s, 0.0), DomainError);
    }

    TEST_CASE("beta means") {
        RngStream s = derive_stream(3, 0, 2);
        const std::array<std::array<double, 3>, 3> cases = {{{6, 2, 0.75}, {1, 1, 0.5}, {2, 6, 0.25}}};
        for (const auto& [a, b, expected] : cases) {
            const auto xs = draws(kDraws, [&] { return sample_beta(s, a, b); });
            CHECK(std::abs(mean_of(xs) - expected) < 0.01);
            CHECK(*std::min_element(xs.begin(), xs.end()) > 0.0);
            CHECK(*std::max_element(xs.begin(), xs.end()) < 1.0);
        }
        CHECK_THROWS_AS(sample_beta(s, 0.0, 1.0), DomainError);
        CHECK_THROWS_AS(sample_beta(s, 1.0, -2.0), DomainError);
    }

    TEST_CASE("beta(a, b) and 1 - beta(b, a) are indistinguishable") {
        RngStream s = derive_stream(3, 0, 3);
        for (const auto& [a, b] : std::vector<std::pair<double, double>>{{2.0, 6.0}, {0.5, 3.0}}) {
            const auto direct = draws(kDraws, [&] { return sample_beta(s, a, b); });
            const auto mirrored = draws(kDraws, [&] { return 1.0 - sample_beta(s, b, a); });
            CHECK(ks_statistic(direct, mirrored) < ks_critical_1pct(kDraws));
        }
    }

    TEST_CASE("categorical") {
        RngStream s = derive_stream(3, 0, 4);
        const std::vector<double> degenerate = {1.0, 0.0};
        for (int i = 0; i < 1000; ++i) {
            REQUIRE(sample_categorical(s, degenerate) == 0);
        }
        for (const std::vector<double>& w :
             {std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 0.3, 0.5}}) {
            std::vector<double> counts(w.size(), 0.0);
            for (std::size_t i = 0; i < kDraws; ++i) counts[sample_categorical(s, w)] += 1.0;
            for (std::size_t j = 0; j < w.size(); ++j) {
                CHECK(std::abs(counts[j] / kDraws - w[j]) < 0.01);
            }
        }
        const std::vector<double> negative = {1.2, -0.2};
        const std::vector<double> unnormalized = {0.5, 0.6};
        CHECK_THROWS_AS(sample_categorical(s, negative), DomainError);
        CHECK_THROWS_AS(sample_categorical(s, unnormalized), DomainError);
    }

    TEST_CASE("bernoulli frequency") {
        RngStream s = derive_stream(3, 0, 5);
        const auto xs = draws(kDraws, [&] { return static_cast<double>(sample_bernoulli(s, 0.75)); });
        CHECK(std::abs(mean_of(xs) - 0.75) < 0.007);
        for (int i = 0; i < 100; ++i) REQUIRE(sample_bernoulli(s, 1.0) == 1);
    }

    TEST_CASE("same stream state gives the same draws") {
        RngStream a = derive_stream(5, 1, 1);
        RngStream b = a;
        CHECK(sample_beta(a, 2.0, 3.0) == sample_beta(b, 2.0, 3.0));
        CHECK(sample_gaussian(a, 0.0, 1.0) == sample_gaussian(b, 0.0, 1.0));
        CHECK(a == b);
    }
}
