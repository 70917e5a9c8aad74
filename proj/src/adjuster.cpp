#include "gdr/adjuster.hpp"

#include <stdexcept>
#include <vector>

#include "gdr/gaussian.hpp"

namespace gdr {

ConstantAdjuster::ConstantAdjuster(double s) : s_(s) {
    if (s < 0.0 || s > 1.0)
        throw std::invalid_argument("ConstantAdjuster: scale must be in [0,1]");
}

Image ConstantAdjuster::adjust(const Image& y_acute, const Image& x_t0, int) const {
    require_same_shape(y_acute, x_t0, "ConstantAdjuster::adjust");
    return Image(x_t0.height, x_t0.width, x_t0.channels, s_);
}

Image local_variance(const Image& img, int window) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("local_variance: window must be odd and >= 3");
    std::vector<double> box(window, 1.0 / window);
    Image m = convolve_sep(img, box, box);
    Image sq = hadamard(img, img);
    Image msq = convolve_sep(sq, box, box);
    Image var(img.height, img.width, img.channels);
    for (std::size_t i = 0; i < var.data.size(); ++i) {
        double v = msq.data[i] - m.data[i] * m.data[i];
        var.data[i] = v > 0.0 ? v : 0.0;
    }
    return var;
}

VarianceAdjuster::VarianceAdjuster(int window, double pivot) : window_(window), pivot_(pivot) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("VarianceAdjuster: window must be odd and >= 3");
    if (!(pivot > 0.0)) throw std::invalid_argument("VarianceAdjuster: pivot must be > 0");
}

Image VarianceAdjuster::adjust(const Image& y_acute, const Image& x_t0, int) const {
    require_same_shape(y_acute, x_t0, "VarianceAdjuster::adjust");
    Image var = local_variance(x_t0, window_);
    Image out(x_t0.height, x_t0.width, x_t0.channels);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = 1.0 / (1.0 + var.data[i] / pivot_);
    return out;
}

}  // namespace gdr
