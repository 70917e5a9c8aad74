#include "gdr/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gdr {

Image::Image(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h <= 0 || w <= 0 || c <= 0)
        throw std::invalid_argument("Image: dimensions must be positive");
}

void require_same_shape(const Image& a, const Image& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch (" +
                                    std::to_string(a.height) + "x" + std::to_string(a.width) + "x" +
                                    std::to_string(a.channels) + " vs " +
                                    std::to_string(b.height) + "x" + std::to_string(b.width) + "x" +
                                    std::to_string(b.channels) + ")");
}

Image add(const Image& a, const Image& b) {
    require_same_shape(a, b, "add");
    Image out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Image sub(const Image& a, const Image& b) {
    require_same_shape(a, b, "sub");
    Image out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Image scaled(const Image& a, double s) {
    Image out = a;
    for (double& v : out.data) v *= s;
    return out;
}

Image axpy(const Image& a, double s, const Image& b) {
    require_same_shape(a, b, "axpy");
    Image out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += s * b.data[i];
    return out;
}

Image hadamard(const Image& a, const Image& b) {
    require_same_shape(a, b, "hadamard");
    Image out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

double dot(const Image& a, const Image& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double sum(const Image& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    return s;
}

double mean(const Image& a) {
    if (a.data.empty()) return 0.0;
    return sum(a) / static_cast<double>(a.data.size());
}

double mean_abs_diff(const Image& a, const Image& b) {
    require_same_shape(a, b, "mean_abs_diff");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
    return s / static_cast<double>(a.data.size());
}

double mean_sq_diff(const Image& a, const Image& b) {
    require_same_shape(a, b, "mean_sq_diff");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.data.size());
}

Image clamp01(const Image& a) {
    Image out = a;
    for (double& v : out.data) {
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
    }
    return out;
}

}  // namespace gdr
