#include "gdr/swt.hpp"

#include <stdexcept>

namespace gdr {

namespace {

// pair average / difference along an axis, right edge reflected so that
// avg + diff reproduces the input exactly
enum class Axis { x, y };

Image pair_op(const Image& img, Axis axis, bool diff) {
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                int yn = y, xn = x;
                if (axis == Axis::y) yn = (y + 1 < img.height) ? y + 1 : y;
                else xn = (x + 1 < img.width) ? x + 1 : x;
                double a = img.at(y, x, c), b = img.at(yn, xn, c);
                out.at(y, x, c) = diff ? 0.5 * (a - b) : 0.5 * (a + b);
            }
        }
    }
    return out;
}

Image pair_op_adjoint(const Image& u, Axis axis, bool diff) {
    int n = (axis == Axis::y) ? u.height : u.width;
    Image out(u.height, u.width, u.channels);
    for (int y = 0; y < u.height; ++y) {
        for (int x = 0; x < u.width; ++x) {
            int m = (axis == Axis::y) ? y : x;
            for (int c = 0; c < u.channels; ++c) {
                double v = 0.0;
                if (diff) {
                    if (m < n - 1) v += 0.5 * u.at(y, x, c);
                    if (m >= 1) {
                        double prev = (axis == Axis::y) ? u.at(y - 1, x, c) : u.at(y, x - 1, c);
                        v -= 0.5 * prev;
                    }
                } else {
                    v += (m < n - 1) ? 0.5 * u.at(y, x, c) : u.at(y, x, c);
                    if (m >= 1) {
                        double prev = (axis == Axis::y) ? u.at(y - 1, x, c) : u.at(y, x - 1, c);
                        v += 0.5 * prev;
                    }
                }
                out.at(y, x, c) = v;
            }
        }
    }
    return out;
}

}  // namespace

SwtBands swt_decompose(const Image& img) {
    if (img.empty()) throw std::invalid_argument("swt_decompose: empty image");
    Image ax = pair_op(img, Axis::x, false);
    Image dx = pair_op(img, Axis::x, true);
    SwtBands b;
    b.ll = pair_op(ax, Axis::y, false);
    b.lh = pair_op(dx, Axis::y, false);
    b.hl = pair_op(ax, Axis::y, true);
    b.hh = pair_op(dx, Axis::y, true);
    return b;
}

Image swt_reconstruct(const SwtBands& bands) {
    return add(add(bands.ll, bands.lh), add(bands.hl, bands.hh));
}

Image swt_band_adjoint(const Image& u, int band) {
    bool diff_x = (band == 1 || band == 3);
    bool diff_y = (band == 2 || band == 3);
    if (band < 0 || band > 3) throw std::invalid_argument("swt_band_adjoint: band must be 0..3");
    Image v = pair_op_adjoint(u, Axis::y, diff_y);
    return pair_op_adjoint(v, Axis::x, diff_x);
}

}  // namespace gdr
