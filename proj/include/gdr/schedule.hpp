#pragma once

#include <vector>

#include "gdr/image.hpp"

namespace gdr {

// Per-timestep coefficient tables of the forward/reverse diffusion process.
// alpha[t] = 1 - beta[t], alpha_bar[t] = prod(alpha[0..t]), sigma[t] = sqrt(beta[t]).
// Immutable after construction; safe to share across threads.
struct DiffusionSchedule {
    int T = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;
    std::vector<double> sigma;
};

// Linear beta ramp from beta_start to beta_end inclusive.
// Requires T >= 2 and 0 < beta_start <= beta_end < 1.
DiffusionSchedule make_schedule(int T, double beta_start, double beta_end);

// x_t = sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * noise
Image q_sample(const Image& x0, int t, const Image& noise, const DiffusionSchedule& sched);

// x0_hat = (x_t - sqrt(1 - alpha_bar[t]) * eps) / sqrt(alpha_bar[t])
Image predict_x0(const Image& x_t, int t, const Image& eps, const DiffusionSchedule& sched);

// Ancestral reverse step:
//   x_{t-1} = (x_t - beta[t]/sqrt(1-alpha_bar[t]) * eps) / sqrt(alpha[t]) + sigma[t]*noise
// The noise term is suppressed at t == 1 (final step is deterministic).
// Requires t >= 1.
Image reverse_step_mean(const Image& x_t, int t, const Image& eps, const Image& noise,
                        const DiffusionSchedule& sched);

}  // namespace gdr
