#pragma once

#include <string>
#include <vector>

#include "gdr/image.hpp"
#include "gdr/schedule.hpp"

namespace gdr {

// Noise-prediction network interface. eps estimates the forward-process noise
// in x_t; vjp applies the transpose Jacobian of eps at x_t to a cotangent.
// Implementations are immutable after construction; both calls are pure.
struct Denoiser {
    virtual Image eps(const Image& x_t, int t) const = 0;
    virtual Image vjp(const Image& x_t, int t, const Image& cotangent) const = 0;
    virtual ~Denoiser() = default;
};

struct GmmComponent {
    double weight = 1.0;
    Image mean;
    double var = 1.0;  // shared isotropic per-pixel variance
};

// Mixture-of-gaussians image prior. Weights positive and summing to 1,
// all means one shape.
struct GmmPrior {
    std::vector<GmmComponent> components;

    void validate() const;
    // analytic mixture moments per pixel, for sampling-sanity tests
    Image mixture_mean() const;
    double mixture_scalar_mean() const;
    double mixture_scalar_second_moment() const;

    // manifest "weight<TAB>var<TAB>mean-file", means as raw tensors
    void save(const std::string& dir) const;
    static GmmPrior load(const std::string& dir);
};

// Exact posterior denoiser for the GMM prior under the forward model
// x_t = sqrt(ab) x0 + sqrt(1-ab) eps. Responsibilities are computed in
// log space; the posterior mean is available in closed form per component,
// and eps follows by inverting the forward relation.
class GmmDenoiser final : public Denoiser {
public:
    GmmDenoiser(GmmPrior prior, const DiffusionSchedule& sched);

    Image eps(const Image& x_t, int t) const override;
    Image vjp(const Image& x_t, int t, const Image& cotangent) const override;

    // E[x0 | x_t]
    Image posterior_mean(const Image& x_t, int t) const;

    const GmmPrior& prior() const { return prior_; }

private:
    GmmPrior prior_;
    const DiffusionSchedule* sched_;
};

// Gradient of s(x) = <eps(x,t), cotangent> by coordinate-wise central
// differences over the given flat-index subset; entries outside the subset
// are zero. Fallback vjp for denoisers without analytic Jacobians.
Image finite_diff_vjp(const Denoiser& den, const Image& x_t, int t, const Image& cotangent,
                      double step, const std::vector<int>& subset);

}  // namespace gdr
