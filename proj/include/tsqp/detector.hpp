#pragma once

#include <limits>

#include "tsqp/rng.hpp"

namespace tsqp {

/// Two-arm polarization detector pair: arm 0 sits behind the 0 degree
/// polarizer, arm 1 behind the 90 degree one.
struct DetectorModel {
    /// Intended-to-orthogonal intensity ratio of the source/analyzer chain.
    /// Finite values leak a fraction 1/(ratio+1) of each arm's light into
    /// the other arm. Infinity disables leakage.
    double extinction_ratio = 500.0;
    /// Probability of a spurious click per arm per bit slot.
    double dark_click_probability = 0.0;

    /// Noise-free detector: infinite extinction, no dark clicks.
    static DetectorModel ideal() {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }

    /// Leakage fraction mixed into the orthogonal arm.
    double leakage() const {
        if (extinction_ratio == std::numeric_limits<double>::infinity()) return 0.0;
        return 1.0 / (extinction_ratio + 1.0);
    }

    bool valid() const {
        return extinction_ratio > 0.0 && dark_click_probability >= 0.0 &&
               dark_click_probability <= 1.0;
    }
};

enum class DetectorOutcome { Bit0 = 0, Bit1 = 1, Erasure = 2 };

inline const char* detector_outcome_name(DetectorOutcome o) {
    switch (o) {
        case DetectorOutcome::Bit0: return "0";
        case DetectorOutcome::Bit1: return "1";
        case DetectorOutcome::Erasure: return "erasure";
    }
    return "?";
}

/// Resolve one bit slot given the ideal optical intensities reaching the two
/// arms. The pulse routes to one arm with probability proportional to the
/// leakage-mixed intensities (misread probability 1/(ratio+1) for a pulse
/// aligned with one arm); dark clicks fire independently per arm. If both
/// arms click the brighter one wins (uniform tie-break); no click at all is
/// an erasure.
DetectorOutcome detector_click(double intensity_arm0, double intensity_arm1,
                               const DetectorModel& detector, Rng& rng);

}  // namespace tsqp
