#include "mgsim/gains.hpp"

#include <cmath>
#include <string>

#include "mgsim/error.hpp"

namespace mgsim {

namespace {
void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string(name) + " must be positive");
}
}  // namespace

void GainSet::validate() const {
    require_positive(k1, "k1");
    require_positive(k2, "k2");
    require_positive(k3, "k3");
    require_positive(alpha, "alpha");
    require_positive(beta, "beta");
    require_positive(rho, "rho");
    require_positive(d, "d");
    if (!(gamma1 > 0.0 && gamma1 < 1.0)) throw ValidationError("gamma1 must be in (0,1)");
    if (!(gamma2 > 1.0) || !std::isfinite(gamma2)) throw ValidationError("gamma2 must be > 1");
}

}  // namespace mgsim
