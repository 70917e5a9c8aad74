#pragma once

#include "gdr/gaussian.hpp"
#include "gdr/image.hpp"
#include "gdr/restorer.hpp"
#include "gdr/spectrum.hpp"

namespace gdr {

// Maps an unknown-degraded input to its Gaussian-blurred surrogate:
// restore, then blur with the estimated std. The surrogate, not the
// estimator's intermediate, is what guides sampling.
Image blur_level_map(const Image& y, const Restorer& restorer, double std_hat);

}  // namespace gdr
