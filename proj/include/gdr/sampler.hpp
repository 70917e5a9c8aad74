#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdr/adjuster.hpp"
#include "gdr/denoiser.hpp"
#include "gdr/gaussian.hpp"
#include "gdr/image.hpp"
#include "gdr/restorer.hpp"
#include "gdr/rng.hpp"
#include "gdr/schedule.hpp"
#include "gdr/spectrum.hpp"
#include "gdr/start_table.hpp"

namespace gdr {

// One measurement surrogate: blurred guidance image, its blur std, its
// mixing weight and the timestep at which it activates.
struct GuidanceItem {
    Image y_acute;
    double std = 0.0;
    double weight = 1.0;
    int t_start = 0;
};

// Ordered by descending std; item 0 is the heaviest blur and activates
// first. Weights positive and non-increasing. Activation of item i is
// t <= t_start of that item; weights are renormalized over the active set.
struct GuidanceSet {
    std::vector<GuidanceItem> items;

    void validate() const;
    std::vector<int> active_items(int t) const;
};

struct SamplerState {
    Image x;
    int t = 0;
    std::vector<double> stds;  // current refined std per guidance item
    Rng rng;

    SamplerState(Image x0, int t0, std::vector<double> stds0, std::uint64_t seed)
        : x(std::move(x0)), t(t0), stds(std::move(stds0)), rng(seed) {}
};

struct GuidanceConfig {
    double s_base = 1.0;         // global factor on the image-guidance term
    bool refine_std = true;
    double std_lr = 0.05;        // step scale on the std refinement
    double std_max_step = 0.05;  // per-step cap on |delta std|
    double std_clamp_min = kDeltaStd;
    double std_clamp_max = 15.0;
};

// Data-fidelity gradient of || y_acute - k (x) x_t^0 ||^2 with respect to x_t,
// chained through the denoiser (kernels are self-transpose under the reflect
// boundary). Uses the item's current refined std from the state.
// Throws if the item is not active at state.t.
Image fidelity_gradient(const SamplerState& state, const GuidanceSet& gset, int item,
                        const Denoiser& den, const DiffusionSchedule& sched);

struct StdGradient {
    double value = 0.0;
    bool skipped = false;  // std at the delta branch, refinement skipped
};

// d/d std of the squared residual, via the kernel profile derivative and the
// separable product rule. Pixel sums, not means.
StdGradient std_gradient(const SamplerState& state, const GuidanceSet& gset, int item,
                         const Denoiser& den, const DiffusionSchedule& sched);

// Internal cores operating on a precomputed x_t^0 (one eps evaluation per
// step is shared across the reverse step and all gradients).
Image fidelity_gradient_core(const Image& x_t, int t, const Image& x_t0, const Image& y_acute,
                             double cur_std, const Denoiser& den, const DiffusionSchedule& sched);
StdGradient std_gradient_core(const Image& x_t0, const Image& y_acute, double cur_std);

struct StepInfo {
    double residual = 0.0;    // mean sq residual of item 0 at x_t^0
    double mean_scale = 0.0;  // mean of A_t
    std::vector<bool> active;
    std::vector<double> grad_norms;  // l2 norms of per-item fidelity gradients
};

// One guided reverse step: epsilon once, unguided ancestral step, scale-map
// weighted guidance over the active items, per-item std refinement,
// decrement t. Exactly one gaussian image is drawn from the state rng per
// step (unused at t == 1).
void guided_step(SamplerState& state, const GuidanceSet& gset, const ScaleAdjuster& adjuster,
                 const Denoiser& den, const DiffusionSchedule& sched, const GuidanceConfig& cfg,
                 StepInfo* info = nullptr);

// Plain DDPM reverse chain from x at timestep t_from down to t=1, drawing one
// gaussian image per step. Reference chain for guidance-off equivalence.
Image unguided_chain(Image x, int t_from, const Denoiser& den, const DiffusionSchedule& sched,
                     Rng& rng);

struct PipelineComponents {
    const Restorer* restorer = nullptr;
    const StdEstimator* estimator = nullptr;
    const StartTable* table = nullptr;
    const ScaleAdjuster* adjuster = nullptr;
    const Denoiser* denoiser = nullptr;
    const DiffusionSchedule* sched = nullptr;
    StdGrid grid;
    GuidanceConfig guidance;
    int n_guidance = 3;
    std::vector<double> lambda = {0.7, 0.2, 0.1};
    std::vector<double> std_offsets = {0.0, 1.0, 2.0};
    bool use_start_table = true;  // false: every item starts at T-1
    std::string trace_path;       // per-step trace when non-empty
};

// default per-source weights by guidance count (1..4)
std::vector<double> default_lambda(int n);

struct RestorationResult {
    Image out;  // clamped to [0,1]
    double std_hat = 0.0;
    int t_start = 0;
    std::vector<double> initial_stds;
    std::vector<double> final_stds;
};

// Full restoration: estimate the blur level, build the guidance set from the
// restored input, pick starting steps, initialize from the heaviest-blur
// surrogate and run the guided chain down to t=1.
RestorationResult run_restoration(const Image& y, const PipelineComponents& pc,
                                  std::uint64_t seed);

}  // namespace gdr
