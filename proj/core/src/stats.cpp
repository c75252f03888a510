#include "kernsat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kernsat {
namespace {

// Regularized incomplete beta I_x(a, b) by continued fraction (Lentz).
double incbeta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double result = d;
    for (int m = 1; m <= 300; ++m) {
        const double dm = static_cast<double>(m);
        // even step
        double numer = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + numer * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + numer / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        result *= d * c;
        // odd step
        numer = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + numer * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + numer / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        result *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return result;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * incbeta_cf(a, b, x) / a;
    }
    return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

double poly(std::span<const double> coeff, double x) {
    // coeff[0] + coeff[1]*x + coeff[2]*x^2 + ...
    double result = 0.0;
    for (size_t i = coeff.size(); i-- > 0;) {
        result = result * x + coeff[i];
    }
    return result;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Bisection on normal_cdf. Slow but exact to ~1e-15 and free of the usual
// rational-approximation constants; callers only need a few dozen values.
double normal_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_ppf: p must be in (0, 1)");
    }
    double lo = -15.0, hi = 15.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double student_t_cdf(double t, int df) {
    if (df < 1) {
        throw std::invalid_argument("student_t_cdf: df must be >= 1");
    }
    if (t == 0.0) return 0.5;
    const double v = static_cast<double>(df);
    const double x = v / (v + t * t);
    const double tail = 0.5 * incbeta(v / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

TestOutcome shapiro_wilk(std::span<const double> samples, double alpha) {
    const size_t n = samples.size();
    if (n < 3 || n > 50) {
        throw std::invalid_argument("shapiro_wilk: sample size " + std::to_string(n) +
                                    " outside [3, 50]");
    }
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    if (x.front() == x.back()) {
        throw std::invalid_argument("shapiro_wilk: zero-variance sample");
    }

    // Expected normal order statistics (Blom), normalized, with Royston's
    // polynomial corrections on the outermost coefficients.
    const double dn = static_cast<double>(n);
    std::vector<double> m(n);
    double m_sum_sq = 0.0;
    for (size_t i = 0; i < n; ++i) {
        m[i] = normal_ppf((static_cast<double>(i + 1) - 0.375) / (dn + 0.25));
        m_sum_sq += m[i] * m[i];
    }

    std::vector<double> a(n, 0.0);
    const double u = 1.0 / std::sqrt(dn);
    static constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const double rsqrt_msq = 1.0 / std::sqrt(m_sum_sq);
    if (n == 3) {
        a[2] = std::numbers::sqrt2 / 2.0;  // exactly 1/sqrt(2)
        a[0] = -a[2];
    } else if (n <= 5) {
        const double an = m[n - 1] * rsqrt_msq + poly(c1, u);
        const double phi = (m_sum_sq - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
        a[n - 1] = an;
        a[0] = -an;
        const double inv_sqrt_phi = 1.0 / std::sqrt(phi);
        for (size_t i = 1; i + 1 < n; ++i) a[i] = m[i] * inv_sqrt_phi;
    } else {
        const double an = m[n - 1] * rsqrt_msq + poly(c1, u);
        const double an1 = m[n - 2] * rsqrt_msq + poly(c2, u);
        const double phi =
            (m_sum_sq - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
            (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
        a[n - 1] = an;
        a[n - 2] = an1;
        a[0] = -an;
        a[1] = -an1;
        const double inv_sqrt_phi = 1.0 / std::sqrt(phi);
        for (size_t i = 2; i + 2 < n; ++i) a[i] = m[i] * inv_sqrt_phi;
    }

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= dn;
    double numerator = 0.0, denominator = 0.0;
    for (size_t i = 0; i < n; ++i) {
        numerator += a[i] * x[i];
        denominator += (x[i] - mean) * (x[i] - mean);
    }
    double w = numerator * numerator / denominator;
    if (w > 1.0) w = 1.0;

    // Royston's normalizing transformation for the p-value.
    double p;
    if (n == 3) {
        constexpr double pi6 = 6.0 / std::numbers::pi;
        constexpr double stqr = std::numbers::pi / 3.0;  // asin(sqrt(3/4))
        p = pi6 * (std::asin(std::sqrt(w)) - stqr);
        p = std::clamp(p, 0.0, 1.0);
    } else {
        const double y = std::log1p(-w);  // log(1 - W)
        double mu, sigma, z;
        if (n <= 11) {
            static constexpr double g[2] = {-2.273, 0.459};
            const double gamma = poly(g, dn);
            if (y >= gamma) {
                p = 0.0;
                TestOutcome outcome{"shapiro_wilk", w, p, alpha, p < alpha};
                return outcome;
            }
            const double yy = -std::log(gamma - y);
            static constexpr double c3[4] = {0.5440, -0.39978, 0.025054, -0.0006714};
            static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
            mu = poly(c3, dn);
            sigma = std::exp(poly(c4, dn));
            z = (yy - mu) / sigma;
        } else {
            const double log_n = std::log(dn);
            static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
            static constexpr double c6[3] = {-0.4803, -0.082676, 0.0030302};
            mu = poly(c5, log_n);
            sigma = std::exp(poly(c6, log_n));
            z = (y - mu) / sigma;
        }
        p = 1.0 - normal_cdf(z);  // upper tail
    }

    return TestOutcome{"shapiro_wilk", w, p, alpha, p < alpha};
}

TestOutcome paired_t_test(std::span<const double> a, std::span<const double> b, bool two_tailed,
                          double alpha) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("paired_t_test: sample length mismatch");
    }
    const size_t n = a.size();
    if (n < 2) {
        throw std::invalid_argument("paired_t_test: need at least 2 pairs");
    }

    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = b[i] - a[i];
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    if (ss == 0.0) {
        throw std::invalid_argument("paired_t_test: zero-variance differences");
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    const int df = static_cast<int>(n) - 1;

    double p;
    if (two_tailed) {
        p = 2.0 * (1.0 - student_t_cdf(std::abs(t), df));
    } else {
        p = 1.0 - student_t_cdf(t, df);
    }
    return TestOutcome{two_tailed ? "paired_t_test_two_tailed" : "paired_t_test_one_tailed", t, p,
                       alpha, p < alpha};
}

std::vector<ConditionSummary> summarize(std::span<const RunResults> conditions) {
    std::vector<ConditionSummary> summaries;
    summaries.reserve(conditions.size());
    for (const RunResults& condition : conditions) {
        if (condition.accuracies.empty()) {
            throw std::invalid_argument("summarize: condition '" + condition.label +
                                        "' has no runs");
        }
        ConditionSummary summary;
        summary.label = condition.label;
        summary.runs = condition.accuracies.size();
        double mean = 0.0;
        for (double v : condition.accuracies) mean += v;
        mean /= static_cast<double>(summary.runs);
        summary.mean = mean;
        if (summary.runs >= 2) {
            double ss = 0.0;
            for (double v : condition.accuracies) ss += (v - mean) * (v - mean);
            summary.variance = ss / static_cast<double>(summary.runs - 1);
        }
        summaries.push_back(std::move(summary));
    }
    return summaries;
}

}  // namespace kernsat
