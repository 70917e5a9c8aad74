#include "gdr/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gdr/rng.hpp"

namespace gdr {

namespace {

// half-sample symmetric: ..., x1, x0 | x0, x1, ..., x_{n-1} | x_{n-1}, ...
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return (i < n) ? i : period - 1 - i;
}

}  // namespace

GaussianKernel make_kernel(double std) {
    if (std < 0.0) throw std::invalid_argument("make_kernel: std must be >= 0");
    if (std < kDeltaStd) {
        GaussianKernel k;
        k.std = std;
        k.radius = 1;
        k.taps = {0.0, 1.0, 0.0};
        return k;
    }
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * std)));
    return make_kernel(std, radius);
}

GaussianKernel make_kernel(double std, int radius) {
    if (std < kDeltaStd)
        throw std::invalid_argument("make_kernel: fixed-radius profile needs std >= delta threshold");
    if (radius < 1) throw std::invalid_argument("make_kernel: radius must be >= 1");
    GaussianKernel k;
    k.std = std;
    k.radius = radius;
    k.taps.resize(2 * radius + 1);
    double s = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * double(i) * double(i) / (std * std));
        k.taps[i + radius] = v;
        s += v;
    }
    for (double& v : k.taps) v /= s;
    return k;
}

std::vector<double> kernel_std_derivative(double std) {
    if (std < kDeltaStd)
        throw std::invalid_argument("kernel_std_derivative: undefined at the delta branch");
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * std)));
    return kernel_std_derivative(std, radius);
}

std::vector<double> kernel_std_derivative(double std, int radius) {
    if (std < kDeltaStd)
        throw std::invalid_argument("kernel_std_derivative: undefined at the delta branch");
    GaussianKernel k = make_kernel(std, radius);
    // taps_i = e_i / S with e_i = exp(-i^2/(2 std^2));
    // d taps_i / d std = taps_i * (i^2 - m2) / std^3, m2 = sum_j taps_j j^2.
    double m2 = 0.0;
    for (int i = -radius; i <= radius; ++i) m2 += k.taps[i + radius] * double(i) * double(i);
    std::vector<double> d(2 * radius + 1);
    double inv_s3 = 1.0 / (std * std * std);
    for (int i = -radius; i <= radius; ++i)
        d[i + radius] = k.taps[i + radius] * (double(i) * double(i) - m2) * inv_s3;
    return d;
}

namespace {

Image convolve_h(const Image& img, const std::vector<double>& taps) {
    int radius = (static_cast<int>(taps.size()) - 1) / 2;
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int d = -radius; d <= radius; ++d)
                    acc += taps[d + radius] * img.at(y, reflect_index(x + d, img.width), c);
                out.at(y, x, c) = acc;
            }
        }
    }
    return out;
}

Image convolve_v(const Image& img, const std::vector<double>& taps) {
    int radius = (static_cast<int>(taps.size()) - 1) / 2;
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int d = -radius; d <= radius; ++d)
                    acc += taps[d + radius] * img.at(reflect_index(y + d, img.height), x, c);
                out.at(y, x, c) = acc;
            }
        }
    }
    return out;
}

}  // namespace

Image convolve_sep(const Image& img, const std::vector<double>& htaps,
                   const std::vector<double>& vtaps) {
    if (img.empty()) throw std::invalid_argument("convolve_sep: empty image");
    return convolve_v(convolve_h(img, htaps), vtaps);
}

Image convolve(const Image& img, const GaussianKernel& k) {
    if (k.is_delta()) return img;
    return convolve_sep(img, k.taps, k.taps);
}

Image convolve_std_derivative(const Image& img, const GaussianKernel& k,
                              const std::vector<double>& dtaps) {
    if (k.taps.size() != dtaps.size())
        throw std::invalid_argument("convolve_std_derivative: taps/dtaps size mismatch");
    Image a = convolve_sep(img, dtaps, k.taps);
    Image b = convolve_sep(img, k.taps, dtaps);
    return add(a, b);
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize_bilinear: output dims must be >= 1");
    Image out(out_h, out_w, img.channels);
    double sy = static_cast<double>(img.height) / out_h;
    double sx = static_cast<double>(img.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int ya = std::clamp(y0, 0, img.height - 1);
        int yb = std::clamp(y0 + 1, 0, img.height - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int xa = std::clamp(x0, 0, img.width - 1);
            int xb = std::clamp(x0 + 1, 0, img.width - 1);
            for (int c = 0; c < img.channels; ++c) {
                double top = (1.0 - wx) * img.at(ya, xa, c) + wx * img.at(ya, xb, c);
                double bot = (1.0 - wx) * img.at(yb, xa, c) + wx * img.at(yb, xb, c);
                out.at(y, x, c) = (1.0 - wy) * top + wy * bot;
            }
        }
    }
    return out;
}

namespace {

constexpr int kBlock = 8;
// quantization step per unit of (100 - quality)
constexpr double kQuantScale = 0.004;

void dct8(const double in[kBlock], double out[kBlock]) {
    for (int k = 0; k < kBlock; ++k) {
        double s = 0.0;
        for (int n = 0; n < kBlock; ++n)
            s += in[n] * std::cos(M_PI / kBlock * (n + 0.5) * k);
        out[k] = s * (k == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock));
    }
}

void idct8(const double in[kBlock], double out[kBlock]) {
    for (int n = 0; n < kBlock; ++n) {
        double s = in[0] * std::sqrt(1.0 / kBlock);
        for (int k = 1; k < kBlock; ++k)
            s += in[k] * std::sqrt(2.0 / kBlock) * std::cos(M_PI / kBlock * (n + 0.5) * k);
        out[n] = s;
    }
}

}  // namespace

Image block_quantize(const Image& img, int quality) {
    if (quality < 30 || quality > 100)
        throw std::invalid_argument("block_quantize: quality must be in [30,100]");
    if (quality == 100) return img;
    double qstep = kQuantScale * (100 - quality);

    // pad to block multiple with edge replication
    int ph = (img.height + kBlock - 1) / kBlock * kBlock;
    int pw = (img.width + kBlock - 1) / kBlock * kBlock;
    Image pad(ph, pw, img.channels);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x)
            for (int c = 0; c < img.channels; ++c)
                pad.at(y, x, c) = img.at(std::min(y, img.height - 1), std::min(x, img.width - 1), c);

    double buf[kBlock], tmp[kBlock];
    for (int c = 0; c < img.channels; ++c) {
        for (int by = 0; by < ph; by += kBlock) {
            for (int bx = 0; bx < pw; bx += kBlock) {
                double coef[kBlock][kBlock];
                // rows then columns
                for (int r = 0; r < kBlock; ++r) {
                    for (int i = 0; i < kBlock; ++i) buf[i] = pad.at(by + r, bx + i, c);
                    dct8(buf, coef[r]);
                }
                for (int col = 0; col < kBlock; ++col) {
                    for (int i = 0; i < kBlock; ++i) buf[i] = coef[i][col];
                    dct8(buf, tmp);
                    for (int i = 0; i < kBlock; ++i)
                        coef[i][col] = std::round(tmp[i] / qstep) * qstep;
                }
                for (int col = 0; col < kBlock; ++col) {
                    for (int i = 0; i < kBlock; ++i) buf[i] = coef[i][col];
                    idct8(buf, tmp);
                    for (int i = 0; i < kBlock; ++i) coef[i][col] = tmp[i];
                }
                for (int r = 0; r < kBlock; ++r) {
                    idct8(coef[r], buf);
                    for (int i = 0; i < kBlock; ++i) pad.at(by + r, bx + i, c) = buf[i];
                }
            }
        }
    }

    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = pad.at(y, x, c);
    return out;
}

Image degrade(const Image& x, const DegradationParams& p, std::uint64_t seed) {
    if (p.sigma < 0.1 || p.sigma > 15.0)
        throw std::invalid_argument("degrade: sigma must be in [0.1,15]");
    if (p.scale < 0.8 || p.scale > 32.0)
        throw std::invalid_argument("degrade: scale must be in [0.8,32]");
    if (p.noise < 0.0 || p.noise > 20.0)
        throw std::invalid_argument("degrade: noise must be in [0,20]");
    if (p.quality < 30 || p.quality > 100)
        throw std::invalid_argument("degrade: quality must be in [30,100]");

    Image y = convolve(x, make_kernel(p.sigma));

    int dh = std::max(1, static_cast<int>(std::lround(x.height / p.scale)));
    int dw = std::max(1, static_cast<int>(std::lround(x.width / p.scale)));
    if (dh != x.height || dw != x.width) y = resize_bilinear(y, dh, dw);

    if (p.noise > 0.0) {
        Rng rng(seed);
        double ns = p.noise / 255.0;
        for (double& v : y.data) v += ns * rng.gaussian();
    }

    y = block_quantize(y, p.quality);

    if (dh != x.height || dw != x.width) y = resize_bilinear(y, x.height, x.width);
    return y;
}

std::vector<double> StdGrid::values() const {
    std::vector<double> out;
    int n = static_cast<int>(std::round((max - min) / step)) + 1;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(min + i * step);
    return out;
}

double StdGrid::snap(double std) const {
    if (std <= min) return min;
    if (std >= max) return max;
    // ties toward larger std
    double idx = (std - min) / step;
    double lo = min + std::floor(idx) * step;
    double hi = lo + step;
    if (hi > max + 1e-12) return max;
    return (std - lo < hi - std - 1e-12) ? lo : hi;
}

StdStarResult find_std_star(const Image& y, const Image& x, const Restorer& restorer,
                            double xi, const StdGrid& grid) {
    require_same_shape(y, x, "find_std_star");
    std::vector<double> stds = grid.values();
    if (stds.empty()) throw std::invalid_argument("find_std_star: empty grid");
    Image restored = restorer.restore(y);
    for (double s : stds) {
        GaussianKernel k = make_kernel(s);
        double err = mean_abs_diff(convolve(restored, k), convolve(x, k));
        if (err < xi) return {s, false};
    }
    return {stds.back(), true};
}

}  // namespace gdr
