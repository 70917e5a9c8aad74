#pragma once

#include "gdr/image.hpp"

namespace gdr {

// Discriminative restoration model interface. Output shape equals input shape.
// Implementations must be immutable after construction (restore is called
// concurrently from batch drivers).
struct Restorer {
    virtual Image restore(const Image& y) const = 0;
    virtual ~Restorer() = default;
};

struct IdentityRestorer final : Restorer {
    Image restore(const Image& y) const override { return y; }
};

// Frequency-domain Wiener deconvolution against the Gaussian transfer
// function of assumed_std, regularized by noise_power. The input is
// mirror-extended before the FFT so the deconvolution matches the reflect
// boundary handling of the forward blur. The DC bin is passed through
// unregularized, so heavy regularization damps everything toward the mean.
// An assumed_std below the delta threshold returns the input unchanged.
class WienerRestorer final : public Restorer {
public:
    WienerRestorer(double assumed_std, double noise_power);
    Image restore(const Image& y) const override;

    double assumed_std() const { return assumed_std_; }
    double noise_power() const { return noise_power_; }

private:
    double assumed_std_;
    double noise_power_;
};

}  // namespace gdr
