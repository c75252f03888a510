#include <cmath>

#include "doctest.h"
#include "kernsat/stats.hpp"
#include "test_support.hpp"

using namespace kernsat;

TEST_CASE("shapiro_wilk closed-form n=3 cases") {
    SUBCASE("{1,2,3}: perfectly linear sample gives W = 1") {
        const std::vector<double> samples = {1.0, 2.0, 3.0};
        const TestOutcome outcome = shapiro_wilk(samples);
        // a = (-1/sqrt(2), 0, 1/sqrt(2)): b^2 = 2, SS = 2, W = 1
        CHECK(outcome.statistic == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(outcome.p_value == doctest::Approx(1.0).epsilon(1e-6));
        CHECK_FALSE(outcome.reject);
    }
    SUBCASE("{1,1,3}: b^2 = 2, SS = 8/3, W = 0.75") {
        const std::vector<double> samples = {1.0, 1.0, 3.0};
        const TestOutcome outcome = shapiro_wilk(samples);
        CHECK(outcome.statistic == doctest::Approx(0.75).epsilon(1e-10));
        // 0.75 is the minimum attainable W at n=3, so its p-value is 0
        CHECK(outcome.p_value == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(outcome.reject);
    }
    SUBCASE("order does not matter") {
        const std::vector<double> a = {3.0, 1.0, 2.0};
        const std::vector<double> b = {1.0, 2.0, 3.0};
        CHECK(shapiro_wilk(a).statistic == shapiro_wilk(b).statistic);
    }
    SUBCASE("degenerate inputs rejected") {
        CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1.0, 2.0}), std::invalid_argument);
        CHECK_THROWS_AS(shapiro_wilk(std::vector<double>(51, 0.0)), std::invalid_argument);
        CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{2.0, 2.0, 2.0}), std::invalid_argument);
    }
}

TEST_CASE("shapiro_wilk matches reference values at larger n") {
    // Frozen from an independent reference implementation of the same
    // algorithm; exercises the 4<=n<=11 and n>=12 p-value branches.
    {
        const std::vector<double> sample = {2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8};
        const TestOutcome outcome = shapiro_wilk(sample);
        CHECK(outcome.statistic == doctest::Approx(0.9401366782).epsilon(1e-6));
        CHECK(outcome.p_value == doctest::Approx(0.6399513746).epsilon(1e-6));
    }
    {
        const std::vector<double> sample = {0.5, 1.5, 2.5, 3.5, 10.0, 11.0,
                                            12.0, 13.0, 0.1, 7.7, 6.6, 5.5};
        const TestOutcome outcome = shapiro_wilk(sample);
        CHECK(outcome.statistic == doctest::Approx(0.9308823554).epsilon(1e-6));
        CHECK(outcome.p_value == doctest::Approx(0.3895582840).epsilon(1e-6));
    }
}

TEST_CASE("shapiro_wilk behaves sensibly at larger n") {
    // W stays in (0, 1] and near-normal samples score high
    std::mt19937_64 gen(301);
    for (int n : {5, 8, 12, 20, 35, 50}) {
        std::vector<double> gaussian(n);
        for (double& v : gaussian) {
            // Box-Muller from our deterministic uniform
            const double u1 = rng::uniform_double(gen) + 1e-12;
            const double u2 = rng::uniform_double(gen);
            v = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
        }
        const TestOutcome outcome = shapiro_wilk(gaussian);
        CHECK(outcome.statistic > 0.0);
        CHECK(outcome.statistic <= 1.0);
        CHECK(outcome.p_value >= 0.0);
        CHECK(outcome.p_value <= 1.0);
    }

    // a wildly skewed sample is confidently rejected
    std::vector<double> skew;
    for (int i = 0; i < 24; ++i) skew.push_back(i < 22 ? 0.01 * i : 1000.0 + i);
    const TestOutcome outcome = shapiro_wilk(skew);
    CHECK(outcome.statistic < 0.6);
    CHECK(outcome.reject);
}

TEST_CASE("paired_t_test") {
    SUBCASE("d = {1,2,3}: t = 2*sqrt(3), df = 2, p from the closed-form CDF") {
        const std::vector<double> a = {10.0, 10.0, 10.0};
        const std::vector<double> b = {11.0, 12.0, 13.0};
        const TestOutcome outcome = paired_t_test(a, b);
        const double expected_t = 2.0 * std::sqrt(3.0);
        CHECK(outcome.statistic == doctest::Approx(expected_t).epsilon(1e-12));
        // closed form for df=2: F(t) = 1/2 + t / (2*sqrt(2+t^2))
        const double cdf = 0.5 + expected_t / (2.0 * std::sqrt(2.0 + expected_t * expected_t));
        const double expected_p = 2.0 * (1.0 - cdf);
        CHECK(outcome.p_value == doctest::Approx(expected_p).epsilon(1e-9));
        CHECK(outcome.p_value == doctest::Approx(0.0742).epsilon(1e-2));
        CHECK_FALSE(outcome.reject);  // 0.0742 > 0.05
    }
    SUBCASE("sign symmetry: negated differences flip t, keep two-tailed p") {
        const std::vector<double> a = {10.0, 10.0, 10.0};
        const std::vector<double> up = {11.0, 12.0, 13.0};
        const std::vector<double> down = {9.0, 8.0, 7.0};
        const TestOutcome pos = paired_t_test(a, up);
        const TestOutcome neg = paired_t_test(a, down);
        CHECK(neg.statistic == doctest::Approx(-pos.statistic).epsilon(1e-12));
        CHECK(neg.p_value == doctest::Approx(pos.p_value).epsilon(1e-12));
    }
    SUBCASE("swapping the samples negates t and keeps p") {
        std::mt19937_64 gen(307);
        std::vector<double> a(6), b(6);
        for (size_t i = 0; i < 6; ++i) {
            a[i] = rng::uniform_double(gen, 0.0, 10.0);
            b[i] = rng::uniform_double(gen, 0.0, 10.0);
        }
        const TestOutcome ab = paired_t_test(a, b);
        const TestOutcome ba = paired_t_test(b, a);
        CHECK(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-12));
        CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    }
    SUBCASE("identical samples rejected (zero-variance differences)") {
        const std::vector<double> a = {1.0, 2.0, 3.0};
        CHECK_THROWS_WITH_AS(paired_t_test(a, a), doctest::Contains("zero-variance"),
                             std::invalid_argument);
    }
    SUBCASE("length mismatch rejected") {
        const std::vector<double> a = {1.0, 2.0};
        const std::vector<double> b = {1.0, 2.0, 3.0};
        CHECK_THROWS_AS(paired_t_test(a, b), std::invalid_argument);
    }
    SUBCASE("one-tailed p is half the two-tailed p for positive t") {
        const std::vector<double> a = {10.0, 10.0, 10.0, 10.0};
        const std::vector<double> b = {11.0, 12.0, 13.0, 11.5};
        const TestOutcome two = paired_t_test(a, b, true);
        const TestOutcome one = paired_t_test(a, b, false);
        CHECK(one.p_value == doctest::Approx(two.p_value / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("student t CDF matches quadrature of the density for df 2..10") {
    for (int df = 2; df <= 10; ++df) {
        for (double t : {0.3, 1.0, 2.0, 3.4641016151377544, 5.0}) {
            const double via_cdf = 2.0 * (1.0 - student_t_cdf(t, df));
            const double via_quadrature = test::t_two_tailed_p_by_quadrature(t, df);
            CHECK(std::abs(via_cdf - via_quadrature) < 1e-6);
        }
    }
}

TEST_CASE("normal helpers") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
    for (double p : {0.01, 0.25, 0.5, 0.9, 0.999}) {
        CHECK(normal_cdf(normal_ppf(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS_AS(normal_ppf(0.0), std::invalid_argument);
}

TEST_CASE("summarize") {
    std::vector<RunResults> conditions;
    conditions.push_back({"cifar10/standard", {80.64, 80.65, 80.66}});
    conditions.push_back({"cifar10/supplemented", {83.81}});
    const auto summaries = summarize(conditions);
    REQUIRE(summaries.size() == 2);
    CHECK(summaries[0].mean == doctest::Approx(80.65).epsilon(1e-12));
    REQUIRE(summaries[0].variance.has_value());
    CHECK(*summaries[0].variance == doctest::Approx(0.0001).epsilon(1e-6));
    CHECK(summaries[1].runs == 1);
    CHECK_FALSE(summaries[1].variance.has_value());  // single run: undefined

    CHECK_THROWS_AS(summarize(std::vector<RunResults>{{"empty", {}}}), std::invalid_argument);
}
