#include "tsqp/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace tsqp {

namespace {

// Standard normal upper quantiles for the levels used in this project.
double z_for_two_sided_alpha(double alpha) {
    if (alpha == 0.05) return 1.959963984540054;   // z_{0.975}
    if (alpha == 0.01) return 2.5758293035489004;  // z_{0.995}
    throw std::invalid_argument("unsupported alpha (use 0.05 or 0.01)");
}

double z_for_upper_tail(double alpha) {
    if (alpha == 0.05) return 1.6448536269514722;  // z_{0.95}
    if (alpha == 0.01) return 2.3263478740408408;  // z_{0.99}
    throw std::invalid_argument("unsupported alpha (use 0.05 or 0.01)");
}

}  // namespace

WilsonInterval wilson_interval_95(std::uint64_t successes, std::uint64_t trials) {
    WilsonInterval w;
    if (trials == 0) return w;
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    w.center = (p + z2 / (2.0 * n)) / denom;
    w.half_width = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return w;
}

bool binomial_test_rejects(std::uint64_t successes, std::uint64_t trials,
                           double p0, double alpha) {
    if (trials == 0) return false;
    const double n = static_cast<double>(trials);
    const double se = std::sqrt(p0 * (1.0 - p0) / n);
    const double z = std::abs(static_cast<double>(successes) / n - p0) / se;
    return z > z_for_two_sided_alpha(alpha);
}

double chi_squared_uniform(const std::vector<std::uint64_t>& counts) {
    if (counts.empty()) return 0.0;
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    if (expected <= 0.0) return 0.0;
    double chi2 = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

double chi_squared_critical(int dof, double alpha) {
    if (dof <= 0) throw std::invalid_argument("dof must be positive");
    const double z = z_for_upper_tail(alpha);
    const double v = static_cast<double>(dof);
    const double t = 1.0 - 2.0 / (9.0 * v) + z * std::sqrt(2.0 / (9.0 * v));
    return v * t * t * t;
}

double mutual_information_bits(const std::uint64_t joint[2][2]) {
    double n = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) n += static_cast<double>(joint[x][y]);
    if (n == 0.0) return 0.0;

    double px[2] = {0, 0}, py[2] = {0, 0};
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            px[x] += static_cast<double>(joint[x][y]) / n;
            py[y] += static_cast<double>(joint[x][y]) / n;
        }

    double mi = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const double pxy = static_cast<double>(joint[x][y]) / n;
            if (pxy > 0.0 && px[x] > 0.0 && py[y] > 0.0)
                mi += pxy * std::log2(pxy / (px[x] * py[y]));
        }
    return mi;
}

}  // namespace tsqp
