#include <doctest.h>

#include <cmath>

#include "tsqp/detector.hpp"
#include "tsqp/stats.hpp"

using namespace tsqp;

TEST_SUITE("detector") {

TEST_CASE("ideal detector resolves aligned pulses deterministically") {
    DetectorModel ideal = DetectorModel::ideal();
    CHECK(ideal.leakage() == 0.0);
    CHECK(ideal.valid());
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        CHECK(detector_click(1.0, 0.0, ideal, rng) == DetectorOutcome::Bit0);
        CHECK(detector_click(0.0, 1.0, ideal, rng) == DetectorOutcome::Bit1);
        CHECK(detector_click(0.0, 0.0, ideal, rng) == DetectorOutcome::Erasure);
    }
}

TEST_CASE("split intensities route in proportion") {
    DetectorModel ideal = DetectorModel::ideal();
    Rng rng(14);
    const int n = 40000;
    int zeros = 0;
    for (int i = 0; i < n; ++i)
        if (detector_click(0.7, 0.3, ideal, rng) == DetectorOutcome::Bit0) ++zeros;
    double sigma = std::sqrt(0.7 * 0.3 / n);
    CHECK(std::abs(static_cast<double>(zeros) / n - 0.7) < 4 * sigma);
}

TEST_CASE("default model leaks 1/501 of an aligned pulse") {
    DetectorModel d;  // 500:1, no dark clicks
    CHECK(d.extinction_ratio == 500.0);
    CHECK(d.leakage() == doctest::Approx(1.0 / 501.0));

    Rng rng(2024);
    const int n = 400000;
    int misreads = 0;
    for (int i = 0; i < n; ++i)
        if (detector_click(1.0, 0.0, d, rng) != DetectorOutcome::Bit0) ++misreads;
    // Bernoulli(1/501) oracle: accept within 4 sigma.
    double p = 1.0 / 501.0;
    double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(misreads) / n - p) < 4 * sigma);
}

TEST_CASE("balanced intensities split evenly") {
    DetectorModel d;
    Rng rng(7);
    const int n = 100000;
    int zeros = 0;
    for (int i = 0; i < n; ++i)
        if (detector_click(0.5, 0.5, d, rng) == DetectorOutcome::Bit0) ++zeros;
    CHECK_FALSE(binomial_test_rejects(zeros, n, 0.5, 0.01));
}

TEST_CASE("dark clicks rescue zero-intensity slots") {
    Rng rng(9);
    DetectorModel always_dark{500.0, 1.0};
    for (int i = 0; i < 50; ++i)
        CHECK(detector_click(0.0, 0.0, always_dark, rng) != DetectorOutcome::Erasure);

    // With per-arm dark probability q and no light, P(erasure) = (1-q)^2.
    DetectorModel half_dark{500.0, 0.5};
    const int n = 100000;
    int erasures = 0, zeros = 0, total_clicks = 0;
    for (int i = 0; i < n; ++i) {
        DetectorOutcome o = detector_click(0.0, 0.0, half_dark, rng);
        if (o == DetectorOutcome::Erasure) ++erasures;
        else {
            ++total_clicks;
            if (o == DetectorOutcome::Bit0) ++zeros;
        }
    }
    double sigma = std::sqrt(0.25 * 0.75 / n);
    CHECK(std::abs(static_cast<double>(erasures) / n - 0.25) < 4 * sigma);
    // Symmetric dark clicks give unbiased outcomes.
    CHECK_FALSE(binomial_test_rejects(zeros, total_clicks, 0.5, 0.01));
}

TEST_CASE("dark click on the empty arm can override a weak pulse") {
    // Bright pulse plus guaranteed dark clicks on both arms: the brighter
    // (leak-mixed) arm wins deterministically.
    DetectorModel d{500.0, 1.0};
    Rng rng(3);
    for (int i = 0; i < 50; ++i)
        CHECK(detector_click(1.0, 0.0, d, rng) == DetectorOutcome::Bit0);
}

TEST_CASE("validity flags") {
    CHECK_FALSE(DetectorModel{-1.0, 0.0}.valid());
    CHECK_FALSE(DetectorModel{500.0, 1.5}.valid());
    CHECK_FALSE(DetectorModel{500.0, -0.1}.valid());
    CHECK(DetectorModel{1.0, 0.5}.valid());
}

TEST_CASE("outcome names") {
    CHECK(std::string(detector_outcome_name(DetectorOutcome::Bit0)) == "0");
    CHECK(std::string(detector_outcome_name(DetectorOutcome::Bit1)) == "1");
    CHECK(std::string(detector_outcome_name(DetectorOutcome::Erasure)) == "erasure");
}

}  // TEST_SUITE
