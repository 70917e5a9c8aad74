#pragma once

#include <cstddef>
#include <vector>

namespace gdr {

// Dense H x W x C raster of doubles, row-major, channel-interleaved.
// Values are nominally in [0,1] at the I/O boundary; intermediate math is
// unclamped, clamping happens only on export.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0);

    double& at(int y, int x, int ch) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
    }
    double at(int y, int x, int ch) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
    }

    std::size_t size() const { return data.size(); }
    int pixels() const { return height * width; }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
    bool empty() const { return data.empty(); }
};

// Throws std::invalid_argument when shapes differ; `where` names the caller.
void require_same_shape(const Image& a, const Image& b, const char* where);

Image add(const Image& a, const Image& b);
Image sub(const Image& a, const Image& b);
Image scaled(const Image& a, double s);
// a + s*b
Image axpy(const Image& a, double s, const Image& b);
Image hadamard(const Image& a, const Image& b);

double dot(const Image& a, const Image& b);
double sum(const Image& a);
double mean(const Image& a);
// mean over pixels of |a-b|
double mean_abs_diff(const Image& a, const Image& b);
// mean over pixels of (a-b)^2
double mean_sq_diff(const Image& a, const Image& b);

Image clamp01(const Image& a);

}  // namespace gdr
