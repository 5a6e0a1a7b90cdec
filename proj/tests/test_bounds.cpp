#include <doctest.h>

#include <cmath>
#include <numbers>

#include "metats/bounds.hpp"
#include "metats/errors.hpp"
#include "metats/oracles.hpp"

using namespace metats;

namespace {

BoundParams reference_params() {
    return BoundParams{2, 200, 20, 1.0, 0.1, 0.5, 0.05};
}

double literal_root_difference(double n, double k, double sigma, double sigma_0) {
    const double offset = sigma * sigma * k / (sigma_0 * sigma_0);
    return std::sqrt(n + offset) - std::sqrt(offset);
}

}  // namespace

TEST_CASE("root differences at the experiment constants") {
    CHECK(root_difference(200, 2, 1.0, 0.1) == doctest::Approx(std::sqrt(400.0) - std::sqrt(200.0)).epsilon(1e-14));
    CHECK(std::abs(root_difference(200, 2, 1.0, 0.1) - 5.858) < 0.01);
    CHECK(std::abs(root_difference(200, 2, 1.0, std::sqrt(0.26)) - 11.638) < 0.01);
    for (double s0 : {0.01, 0.3, 2.0}) {
        CHECK(root_difference(50, 4, 1.5, s0) == doctest::Approx(literal_root_difference(50, 4, 1.5, s0)).epsilon(1e-12));
    }
}

TEST_CASE("root difference decreases as the prior concentrates") {
    double previous = INFINITY;
    for (double s0 = 2.0; s0 > 1e-4; s0 *= 0.8) {
        const double value = root_difference(200, 2, 1.0, s0);
        REQUIRE(value < previous);
        REQUIRE(value > 0.0);
        previous = value;
    }
}

TEST_CASE("lemma 1 bound") {
    BoundParams p = reference_params();
    p.delta = 1.0 / 200.0;
    const double log_inv = std::log(200.0);
    const double c = 2.0 * std::sqrt(2.0 * 0.01 * log_inv) * 2 + std::sqrt(2.0 * 0.01 / std::numbers::pi) * 2 * 200 * p.delta;
    CHECK(lemma1_bound(p) ==
          doctest::Approx(c + 4.0 * std::sqrt(2.0 * 2 * log_inv) * (20.0 - std::sqrt(200.0))).epsilon(1e-12));

    // sigma_0 -> 0 leaves only c(delta): the remainder shrinks linearly in sigma_0.
    for (double s0 : {1e-9, 1e-12}) {
        p.sigma_0 = s0;
        const double c_tiny = 2.0 * std::sqrt(2.0 * s0 * s0 * log_inv) * 2 +
                              std::sqrt(2.0 * s0 * s0 / std::numbers::pi) * 2 * 200 * p.delta;
        CHECK(std::abs(lemma1_bound(p) - c_tiny) < 2e3 * s0);
    }

    p.sigma_0 = 0.0;
    CHECK_THROWS_AS(lemma1_bound(p), DomainError);
    p = reference_params();
    p.delta = 1.0;
    CHECK_THROWS_AS(lemma1_bound(p), DomainError);
}

TEST_CASE("lemma 2 bound is affine in epsilon and quadratic in n") {
    BoundParams p = reference_params();
    const double at0 = lemma2_bound(p, 0.7, 0.0);
    const double at1 = lemma2_bound(p, 0.7, 0.01);
    const double at2 = lemma2_bound(p, 0.7, 0.02);
    CHECK((at2 - at1) == doctest::Approx(at1 - at0).epsilon(1e-12));

    BoundParams doubled = p;
    doubled.horizon = 400;
    const double term = at1 - at0;
    const double term_doubled = lemma2_bound(doubled, 0.7, 0.01) - lemma2_bound(doubled, 0.7, 0.0);
    CHECK(term_doubled == doctest::Approx(4.0 * term).epsilon(1e-12));

    p.delta = 1e-300;
    CHECK(lemma2_bound(p, 0.7, 0.0) < 1e-290);
    CHECK_THROWS_AS(lemma2_bound(p, 0.7, -0.1), DomainError);
}

TEST_CASE("lemma 3 radius") {
    const BoundParams p = reference_params();
    CHECK(lemma3_radius(p, 1) == doctest::Approx(2.0 * std::sqrt(2.0 * 0.25 * std::log(160.0))).epsilon(1e-14));
    CHECK(std::abs(lemma3_radius(p, 1) - 3.186) < 1e-3);
    double previous = INFINITY;
    double worst_scaled = 0.0;
    for (std::size_t s = 1; s <= 100000; s = s < 10 ? s + 1 : s * 2) {
        const double r = lemma3_radius(p, s);
        REQUIRE(r < previous);
        previous = r;
        worst_scaled = std::max(worst_scaled, r * std::sqrt(static_cast<double>(s)));
    }
    // s / ((sigma_0^2 + sigma^2) / sigma_q^2 + s - 1) <= 1 here, so radius(s) sqrt(s) is at most
    // 2 sqrt(2 (sigma_0^2 + sigma^2) log(4K/delta)).
    CHECK(worst_scaled <= 2.0 * std::sqrt(2.0 * 1.01 * std::log(160.0)));
    CHECK_THROWS_AS(lemma3_radius(p, 0), DomainError);
}

TEST_CASE("theorem 1 constants at the experiment parameters") {
    const auto b = theorem1_bound(reference_params());
    CHECK(std::abs(b.c1 - 13.021) < 1e-3);
    CHECK(std::abs(b.c2 - 3.611) < 1e-3);
    CHECK(std::abs(b.c3 - 102.2) < 0.05);
    CHECK(b.leading == doctest::Approx(b.learning_term + b.meta_term));
    CHECK(b.full == doctest::Approx(b.leading + b.residue));
    CHECK(b.residue == doctest::Approx(4.0 * std::sqrt(0.26 * std::log(80.0)) * (200 + 2 * 20)));
    CHECK(b.learning_term == doctest::Approx(b.c1 * std::sqrt(2.0) * root_difference(200, 2, 1.0, 0.1) * 20));
}

TEST_CASE("theorem 1 terms scale linearly and as sqrt in the task count") {
    BoundParams p = reference_params();
    const auto one = theorem1_bound(p);
    p.tasks = 40;
    const auto two = theorem1_bound(p);
    CHECK(two.learning_term - one.learning_term == doctest::Approx(one.learning_term).epsilon(1e-12));
    p.tasks = 80;
    const auto four = theorem1_bound(p);
    CHECK(four.meta_term == doctest::Approx(2.0 * one.meta_term).epsilon(1e-12));
}

TEST_CASE("evaluators stay finite and positive") {
    for (std::size_t k : {2u, 5u, 40u}) {
        for (std::size_t n : {1u, 10u, 1000u}) {
            for (double s0 : {0.01, 0.1, 1.0}) {
                const BoundParams p{k, n, 7, 0.5, s0, 0.3, 0.01};
                REQUIRE(std::isfinite(lemma1_bound(p)));
                REQUIRE(lemma1_bound(p) > 0.0);
                REQUIRE(lemma2_bound(p, 0.2, 0.1) > 0.0);
                REQUIRE(lemma3_radius(p, 3) > 0.0);
                const auto t = theorem1_bound(p);
                REQUIRE(std::isfinite(t.full));
                REQUIRE(t.full >= 0.0);
            }
        }
    }
}

TEST_CASE("technical lemma spot values") {
    CHECK(static_cast<double>(oracle::root_partial_sum(1, 0.0)) == 1.0);
    CHECK(static_cast<double>(oracle::root_partial_sum(100, 0.0)) == doctest::Approx(18.5896).epsilon(1e-5));
    CHECK(oracle::root_partial_sum(100, 0.0) <= 20.0L);
    CHECK(static_cast<double>(oracle::harmonic_partial_sum(10, 1.0)) == doctest::Approx(2.0198773).epsilon(1e-7));
    CHECK(static_cast<double>(oracle::harmonic_partial_sum(10, 1.0)) <= std::log(11.0));
}

TEST_CASE("technical lemmas hold on random trials") {
    const auto check = check_technical_lemmas(10000);
    CHECK(check.trials == 10000);
    CHECK(check.passed());
    INFO(check.first_failure);
}

TEST_CASE("lemma 1 certification") {
    ExperimentConfig c = default_config();
    const auto cert = certify_lemma1(c, 300, 0);
    CHECK(cert.runs == 300);
    CHECK(cert.holds);
    CHECK(cert.empirical_mean > 0.0);

    c.horizon = 1;
    const auto single = certify_lemma1(c, 300, 0);
    CHECK(single.holds);

    // Wider prior: both the empirical regret and the bound grow.
    c = default_config();
    c.sigma_0 = 0.5;
    const auto wide = certify_lemma1(c, 300, 0);
    CHECK(wide.bound > cert.bound);
    CHECK(wide.empirical_mean > cert.empirical_mean);

    c.family = Family::kBernoulli;
    CHECK_THROWS_AS(certify_lemma1(c, 10, 0), DomainError);
}

TEST_CASE("lemma 3 certification") {
    ExperimentConfig c = default_config();
    c.tasks = 5;
    const auto cert = certify_lemma3(c, 300, 0.1, 0);
    CHECK(cert.replications == 300);
    CHECK(cert.allowed_frequency == doctest::Approx(0.5));
    CHECK(cert.violation_frequency <= 0.5);
    CHECK(cert.holds);

    const auto vacuous = certify_lemma3(c, 50, 0.9, 0);
    CHECK(vacuous.allowed_frequency >= 1.0);
    CHECK(vacuous.holds);

    c.sigma_q = 1e-6;
    const auto degenerate = certify_lemma3(c, 200, 0.1, 0);
    CHECK(degenerate.violation_frequency <= 0.5);
}

TEST_CASE("bound report layout") {
    const auto report = bound_report(default_config(), false, 0);
    for (const char* key : {"params", "leading_terms", "full_bound", "empirical", "violation_frequency"}) {
        CHECK(report.contains(key));
    }
    CHECK(std::abs(report["leading_terms"]["root_difference"].get<double>() - 5.858) < 0.01);
    CHECK(std::abs(report["leading_terms"]["root_difference_marginal"].get<double>() - 11.638) < 0.01);
    CHECK(report["full_bound"]["theorem1"].get<double>() > report["leading_terms"]["theorem1"]["leading"].get<double>());
}
