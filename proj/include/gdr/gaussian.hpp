#pragma once

#include <cstdint>
#include <vector>

#include "gdr/image.hpp"
#include "gdr/restorer.hpp"

namespace gdr {

// Below this std the kernel degenerates to the discrete delta and the
// std derivative is undefined.
inline constexpr double kDeltaStd = 0.05;

// Separable discrete Gaussian. taps has 2*radius+1 entries, symmetric,
// positive, summing to 1.
struct GaussianKernel {
    double std = 0.0;
    int radius = 1;
    std::vector<double> taps;

    bool is_delta() const { return std < kDeltaStd; }
};

// Natural support: radius = max(1, ceil(3*std)). std below kDeltaStd gives
// the delta kernel [0,1,0].
GaussianKernel make_kernel(double std);
// Same profile on a caller-fixed support (used where the support must stay
// stable while std varies, e.g. finite differencing).
GaussianKernel make_kernel(double std, int radius);

// d taps[i] / d std at fixed support; entries sum to zero.
// Throws for std below the delta threshold.
std::vector<double> kernel_std_derivative(double std);
std::vector<double> kernel_std_derivative(double std, int radius);

// Separable convolution with half-sample symmetric (reflect) boundary,
// horizontal pass with htaps then vertical pass with vtaps. For symmetric
// taps this operator is exactly self-transpose. Output shape equals input.
Image convolve_sep(const Image& img, const std::vector<double>& htaps,
                   const std::vector<double>& vtaps);
Image convolve(const Image& img, const GaussianKernel& k);

// d/d std of convolve(img, kernel(std)): product rule across both passes.
Image convolve_std_derivative(const Image& img, const GaussianKernel& k,
                              const std::vector<double>& dtaps);

// Synthetic degradation: blur, bilinear down/up by factor scale, additive
// gaussian noise (0-255 scale), block-quantization compression proxy.
struct DegradationParams {
    double sigma = 0.1;   // blur std, [0.1, 15]
    double scale = 1.0;   // down/up factor, [0.8, 32]
    double noise = 0.0;   // noise level, [0, 20] on the 0-255 scale
    int quality = 100;    // compression quality proxy, [30, 100]
};

// Deterministic given seed. Throws when params are out of range.
Image degrade(const Image& x, const DegradationParams& p, std::uint64_t seed);

Image resize_bilinear(const Image& img, int out_h, int out_w);

// 8x8 block DCT with uniform quantization step linear in (100 - quality);
// quality 100 is the identity. Exposed for tests.
Image block_quantize(const Image& img, int quality);

struct StdGrid {
    double min = 0.1;
    double max = 15.0;
    double step = 0.1;

    std::vector<double> values() const;
    // Nearest grid value, ties toward larger std; out-of-range clamps.
    double snap(double std) const;
    bool contains(double std) const { return std >= min - 1e-9 && std <= max + 1e-9; }
};

struct StdStarResult {
    double std = 0.0;
    bool saturated = false;  // no grid value met the tolerance; std is the grid max
};

// Smallest grid std whose blur makes restorer(y) and x indistinguishable:
//   mean |k_std (x) restorer(y) - k_std (x) x|  <  xi
StdStarResult find_std_star(const Image& y, const Image& x, const Restorer& restorer,
                            double xi, const StdGrid& grid);

}  // namespace gdr
