#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kernsat {

// Final test accuracies of one experimental condition, one value per run.
struct RunResults {
    std::string label;
    std::vector<double> accuracies;
};

struct TestOutcome {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 0.0;
    double alpha = 0.05;
    bool reject = false;  // p < alpha
};

// Shapiro-Wilk normality test for 3 <= n <= 50. Coefficients follow
// Royston's algorithm (normalized Blom scores with polynomial end
// corrections); the p-value uses Royston's small-sample normalizing
// transformation. Throws for n outside [3, 50] or a zero-variance sample.
TestOutcome shapiro_wilk(std::span<const double> samples, double alpha = 0.05);

// Paired t-test on differences d = b - a with sample (n-1) standard
// deviation; p from Student's t with n-1 degrees of freedom, two-tailed by
// default. The one-tailed variant tests the upper tail (mean(b-a) > 0).
// Throws on length mismatch, n < 2, or zero-variance differences.
TestOutcome paired_t_test(std::span<const double> a, std::span<const double> b,
                          bool two_tailed = true, double alpha = 0.05);

struct ConditionSummary {
    std::string label;
    size_t runs = 0;
    double mean = 0.0;
    std::optional<double> variance;  // sample variance; absent for a single run
};

std::vector<ConditionSummary> summarize(std::span<const RunResults> conditions);

// Numeric kernels, exposed so tests can check them against independent
// oracles.
double normal_cdf(double z);
double normal_ppf(double p);
double student_t_cdf(double t, int df);

}  // namespace kernsat
