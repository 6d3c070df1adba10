#include <doctest.h>

#include <cmath>

#include "tsqp/rng.hpp"
#include "tsqp/stats.hpp"

using namespace tsqp;

TEST_SUITE("stats") {

TEST_CASE("wilson interval matches published reference values") {
    // 5/10 at 95%: the textbook Wilson interval is (0.2366, 0.7634).
    WilsonInterval w = wilson_interval_95(5, 10);
    CHECK(w.lo() == doctest::Approx(0.2366).epsilon(0.002));
    CHECK(w.hi() == doctest::Approx(0.7634).epsilon(0.002));
    CHECK(w.center == doctest::Approx(0.5));  // symmetric case

    // 0/10: lower bound 0, upper bound z^2/(n+z^2) = 0.27753.
    WilsonInterval zero = wilson_interval_95(0, 10);
    CHECK(std::abs(zero.lo()) < 1e-12);
    CHECK(zero.hi() == doctest::Approx(0.27753).epsilon(0.001));

    // Interval is always inside [0, 1] and contains the point estimate.
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        std::uint64_t n = 1 + rng.below(5000);
        std::uint64_t k = rng.below(n + 1);
        WilsonInterval v = wilson_interval_95(k, n);
        double phat = static_cast<double>(k) / static_cast<double>(n);
        CHECK(v.lo() >= -1e-12);
        CHECK(v.hi() <= 1.0 + 1e-12);
        CHECK(v.lo() <= phat + 1e-12);
        CHECK(v.hi() >= phat - 1e-12);
    }
}

TEST_CASE("binomial test rejects exactly past the 1% z threshold") {
    // n=100, p0=0.5: sigma = 5, threshold 2.5758 sigma = 12.88.
    CHECK_FALSE(binomial_test_rejects(50, 100, 0.5, 0.01));
    CHECK_FALSE(binomial_test_rejects(62, 100, 0.5, 0.01));  // z = 2.4
    CHECK(binomial_test_rejects(63, 100, 0.5, 0.01));        // z = 2.6
    CHECK(binomial_test_rejects(37, 100, 0.5, 0.01));        // symmetric
    // 5% level is stricter: z threshold 1.96, so 60/100 (z = 2) rejects.
    CHECK(binomial_test_rejects(60, 100, 0.5, 0.05));
    CHECK_FALSE(binomial_test_rejects(59, 100, 0.5, 0.05));
}

TEST_CASE("chi-squared statistic and critical values") {
    CHECK(chi_squared_uniform({25, 25, 25, 25}) == 0.0);
    // Counts {10, 20}: expected 15 each, statistic (25+25)/15 = 10/3.
    CHECK(chi_squared_uniform({10, 20}) == doctest::Approx(10.0 / 3.0));

    // Published upper critical values: chi2(35, 0.01) = 57.342,
    // chi2(1, 0.01) = 6.635, chi2(10, 0.05) = 18.307.
    CHECK(chi_squared_critical(35, 0.01) == doctest::Approx(57.342).epsilon(0.002));
    CHECK(chi_squared_critical(1, 0.01) == doctest::Approx(6.635).epsilon(0.01));
    CHECK(chi_squared_critical(10, 0.05) == doctest::Approx(18.307).epsilon(0.005));
}

TEST_CASE("chi-squared accepts genuinely uniform draws at the 1% level") {
    Rng rng(99);
    const int bins = 36;
    std::vector<std::uint64_t> counts(bins, 0);
    for (int i = 0; i < 36000; ++i) counts[rng.below(bins)]++;
    double stat = chi_squared_uniform(counts);
    CHECK(stat < chi_squared_critical(bins - 1, 0.01));

    // A clearly skewed sample must be rejected.
    std::vector<std::uint64_t> skewed(bins, 1000);
    skewed[0] = 2000;
    CHECK(chi_squared_uniform(skewed) > chi_squared_critical(bins - 1, 0.01));
}

TEST_CASE("mutual information closed forms") {
    const std::uint64_t perfect[2][2] = {{50, 0}, {0, 50}};
    CHECK(mutual_information_bits(perfect) == doctest::Approx(1.0));

    const std::uint64_t independent[2][2] = {{25, 25}, {25, 25}};
    CHECK(std::abs(mutual_information_bits(independent)) < 1e-12);

    // Binary symmetric channel with flip probability 0.2:
    // I = 1 - h(0.2) = 0.278072 bits.
    const std::uint64_t bsc[2][2] = {{40, 10}, {10, 40}};
    CHECK(mutual_information_bits(bsc) == doctest::Approx(0.2780719).epsilon(1e-6));

    // Degenerate margin carries no information.
    const std::uint64_t onesided[2][2] = {{50, 50}, {0, 0}};
    CHECK(std::abs(mutual_information_bits(onesided)) < 1e-12);
}

TEST_CASE("rng streams are deterministic and forked streams differ") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng parent(7);
    Rng f0 = parent.fork(0);
    Rng f1 = parent.fork(1);
    CHECK(f0.next_u64() != f1.next_u64());
    // fork is independent of parent consumption
    Rng parent2(7);
    parent2.next_u64();
    CHECK(parent.fork(3).next_u64() == parent2.fork(3).next_u64());
}

TEST_CASE("rng uniform and gaussian moments") {
    Rng rng(123);
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sumsq += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sumsq / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));

    double gsum = 0.0, gsumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = rng.gaussian();
        gsum += g;
        gsumsq += g * g;
    }
    CHECK(std::abs(gsum / n) < 0.02);
    CHECK(std::abs(gsumsq / n - 1.0) < 0.02);
}

TEST_CASE("rng below is unbiased over a small modulus") {
    Rng rng(5);
    std::vector<std::uint64_t> counts(7, 0);
    for (int i = 0; i < 70000; ++i) counts[rng.below(7)]++;
    CHECK(chi_squared_uniform(counts) < chi_squared_critical(6, 0.01));
}

}  // TEST_SUITE
