#include "gdr/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "gdr/gaussian.hpp"

namespace gdr {

double psnr(const Image& a, const Image& b) {
    double mse = mean_sq_diff(a, b);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b, int window) {
    require_same_shape(a, b, "ssim");
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("ssim: window must be odd and >= 3");
    if (a.height < window || a.width < window)
        throw std::invalid_argument("ssim: image smaller than window");

    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    double inv_n = 1.0 / (window * window);

    double acc = 0.0;
    long count = 0;
    for (int c = 0; c < a.channels; ++c) {
        for (int y = 0; y + window <= a.height; ++y) {
            for (int x = 0; x + window <= a.width; ++x) {
                double ma = 0.0, mb = 0.0;
                for (int dy = 0; dy < window; ++dy)
                    for (int dx = 0; dx < window; ++dx) {
                        ma += a.at(y + dy, x + dx, c);
                        mb += b.at(y + dy, x + dx, c);
                    }
                ma *= inv_n;
                mb *= inv_n;
                double va = 0.0, vb = 0.0, cov = 0.0;
                for (int dy = 0; dy < window; ++dy)
                    for (int dx = 0; dx < window; ++dx) {
                        double da = a.at(y + dy, x + dx, c) - ma;
                        double db = b.at(y + dy, x + dx, c) - mb;
                        va += da * da;
                        vb += db * db;
                        cov += da * db;
                    }
                va *= inv_n;
                vb *= inv_n;
                cov *= inv_n;
                acc += (2.0 * ma * mb + c1) * (2.0 * cov + c2) /
                       ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
        }
    }
    return acc / count;
}

double consistency(const Image& y_acute, double std, const Image& out) {
    return mean_sq_diff(y_acute, convolve(out, make_kernel(std)));
}

double sharpness(const Image& img) {
    double acc = 0.0;
    long count = 0;
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y + 1 < img.height; ++y)
            for (int x = 0; x + 1 < img.width; ++x) {
                double gx = img.at(y, x + 1, c) - img.at(y, x, c);
                double gy = img.at(y + 1, x, c) - img.at(y, x, c);
                acc += std::sqrt(gx * gx + gy * gy);
                ++count;
            }
    return acc / count;
}

}  // namespace gdr
