#pragma once

namespace mgsim {

// Secondary-controller tuning. Ranges are checked by validate().
struct GainSet {
    double k1 = 6.0;
    double k2 = 7.0;
    double k3 = 3.5;
    double alpha = 72.0;
    double beta = 12.0;
    double gamma1 = 0.5;
    double gamma2 = 1.5;
    double rho = 0.1;
    double d = 1.0;

    // Throws ValidationError naming the first bad field.
    void validate() const;

    bool operator==(const GainSet&) const = default;
};

}  // namespace mgsim
