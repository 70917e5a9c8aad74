#include "gdr/blur_map.hpp"

namespace gdr {

Image blur_level_map(const Image& y, const Restorer& restorer, double std_hat) {
    return convolve(restorer.restore(y), make_kernel(std_hat));
}

}  // namespace gdr
