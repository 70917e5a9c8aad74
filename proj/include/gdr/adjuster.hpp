#pragma once

#include <memory>

#include "gdr/image.hpp"

namespace gdr {

// Produces the region-wise guidance scaling map A_t, entries in [0,1],
// shape equal to the image. Pure and concurrently callable.
struct ScaleAdjuster {
    virtual Image adjust(const Image& y_acute, const Image& x_t0, int t) const = 0;
    virtual ~ScaleAdjuster() = default;
};

// A_t == s everywhere.
class ConstantAdjuster final : public ScaleAdjuster {
public:
    explicit ConstantAdjuster(double s);
    Image adjust(const Image& y_acute, const Image& x_t0, int t) const override;
    double scale() const { return s_; }

private:
    double s_;
};

// A = 1 / (1 + localvar(x_t0, window)/pivot): strong guidance on smooth
// regions, weak on structured ones.
class VarianceAdjuster final : public ScaleAdjuster {
public:
    VarianceAdjuster(int window, double pivot);
    Image adjust(const Image& y_acute, const Image& x_t0, int t) const override;

private:
    int window_;
    double pivot_;
};

// window x window local variance with reflect boundary
Image local_variance(const Image& img, int window);

}  // namespace gdr
