#pragma once

#include <cstdint>
#include <vector>

namespace tsqp {

/// Two-sided 95% Wilson score interval for a binomial proportion.
struct WilsonInterval {
    double center = 0.0;
    double half_width = 0.0;
    double lo() const { return center - half_width; }
    double hi() const { return center + half_width; }
};

WilsonInterval wilson_interval_95(std::uint64_t successes, std::uint64_t trials);

/// Two-sided binomial test of H0: p = p0 via the normal approximation.
/// Returns true when H0 is rejected at the given level (0.01 or 0.05).
bool binomial_test_rejects(std::uint64_t successes, std::uint64_t trials,
                           double p0, double alpha);

/// Chi-squared goodness-of-fit statistic against a uniform distribution
/// over `counts.size()` bins.
double chi_squared_uniform(const std::vector<std::uint64_t>& counts);

/// Upper critical value of the chi-squared distribution
/// (Wilson-Hilferty approximation; adequate for the test sizes used here).
double chi_squared_critical(int dof, double alpha);

/// Plug-in estimate of mutual information (in bits) between two binary
/// variables from a 2x2 joint count table: joint[x][y].
double mutual_information_bits(const std::uint64_t joint[2][2]);

}  // namespace tsqp
