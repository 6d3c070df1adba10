#include "tsqp/detector.hpp"

#include <stdexcept>

namespace tsqp {

DetectorOutcome detector_click(double intensity_arm0, double intensity_arm1,
                               const DetectorModel& detector, Rng& rng) {
    if (intensity_arm0 < 0.0 || intensity_arm1 < 0.0)
        throw std::invalid_argument("detector intensities must be nonnegative");
    if (!detector.valid()) throw std::invalid_argument("invalid detector model");

    double e = detector.leakage();
    double j0 = (1.0 - e) * intensity_arm0 + e * intensity_arm1;
    double j1 = (1.0 - e) * intensity_arm1 + e * intensity_arm0;

    int signal_arm = -1;
    double total = j0 + j1;
    if (total > 0.0) signal_arm = (rng.uniform() * total < j0) ? 0 : 1;

    bool dark0 = false;
    bool dark1 = false;
    if (detector.dark_click_probability > 0.0) {
        dark0 = rng.bernoulli(detector.dark_click_probability);
        dark1 = rng.bernoulli(detector.dark_click_probability);
    }

    bool click0 = (signal_arm == 0) || dark0;
    bool click1 = (signal_arm == 1) || dark1;

    if (click0 && click1) {
        if (j0 > j1) return DetectorOutcome::Bit0;
        if (j1 > j0) return DetectorOutcome::Bit1;
        return rng.bernoulli(0.5) ? DetectorOutcome::Bit1 : DetectorOutcome::Bit0;
    }
    if (click0) return DetectorOutcome::Bit0;
    if (click1) return DetectorOutcome::Bit1;
    return DetectorOutcome::Erasure;
}

}  // namespace tsqp
