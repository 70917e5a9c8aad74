#pragma once

#include <limits>

#include "gdr/image.hpp"

namespace gdr {

// Peak signal-to-noise ratio on unit range; +inf sentinel for identical
// images.
double psnr(const Image& a, const Image& b);

// Structural similarity, uniform window (default 7x7), k1=0.01 k2=0.03 on
// unit range, averaged over fully-valid window positions. Symmetric.
double ssim(const Image& a, const Image& b, int window = 7);

// Measurement consistency: mean over pixels of (y_acute - k_std (x) out)^2.
double consistency(const Image& y_acute, double std, const Image& out);

// No-reference sharpness proxy: mean forward-difference gradient magnitude.
double sharpness(const Image& img);

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double consistency = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace gdr
