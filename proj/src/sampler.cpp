#include "gdr/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gdr/blur_map.hpp"

namespace gdr {

void GuidanceSet::validate() const {
    if (items.empty()) throw std::invalid_argument("GuidanceSet: empty");
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!(items[i].weight > 0.0))
            throw std::invalid_argument("GuidanceSet: weights must be positive");
        if (i > 0) {
            if (items[i].std > items[i - 1].std + 1e-12)
                throw std::invalid_argument("GuidanceSet: items must be sorted by descending std");
            if (items[i].weight > items[i - 1].weight + 1e-12)
                throw std::invalid_argument("GuidanceSet: weights must be non-increasing");
        }
        if (!items[i].y_acute.same_shape(items[0].y_acute))
            throw std::invalid_argument("GuidanceSet: guidance images must share one shape");
    }
}

std::vector<int> GuidanceSet::active_items(int t) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (t <= items[i].t_start) out.push_back(static_cast<int>(i));
    return out;
}

Image fidelity_gradient_core(const Image& x_t, int t, const Image& x_t0, const Image& y_acute,
                             double cur_std, const Denoiser& den, const DiffusionSchedule& sched) {
    GaussianKernel k = make_kernel(cur_std);
    Image residual = sub(convolve(x_t0, k), y_acute);
    Image cot = scaled(convolve(residual, k), 2.0);
    Image jv = den.vjp(x_t, t, cot);
    double ab = sched.alpha_bar[t];
    double sq_ab = std::sqrt(ab);
    double sq_1m = std::sqrt(1.0 - ab);
    Image out(x_t.height, x_t.width, x_t.channels);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (cot.data[i] - sq_1m * jv.data[i]) / sq_ab;
    return out;
}

StdGradient std_gradient_core(const Image& x_t0, const Image& y_acute, double cur_std) {
    if (cur_std < kDeltaStd) return {0.0, true};
    GaussianKernel k = make_kernel(cur_std);
    std::vector<double> dk = kernel_std_derivative(cur_std, k.radius);
    Image kx = convolve(x_t0, k);
    Image dkx = convolve_std_derivative(x_t0, k, dk);
    double g = 0.0;
    for (std::size_t i = 0; i < kx.data.size(); ++i)
        g += dkx.data[i] * (kx.data[i] - y_acute.data[i]);
    return {2.0 * g, false};
}

namespace {

void check_item_active(const SamplerState& state, const GuidanceSet& gset, int item,
                       const char* where) {
    if (item < 0 || item >= static_cast<int>(gset.items.size()))
        throw std::invalid_argument(std::string(where) + ": item index out of range");
    if (state.t > gset.items[item].t_start)
        throw std::logic_error(std::string(where) + ": item " + std::to_string(item) +
                               " inactive at t=" + std::to_string(state.t));
}

}  // namespace

Image fidelity_gradient(const SamplerState& state, const GuidanceSet& gset, int item,
                        const Denoiser& den, const DiffusionSchedule& sched) {
    check_item_active(state, gset, item, "fidelity_gradient");
    Image eps = den.eps(state.x, state.t);
    Image x0 = predict_x0(state.x, state.t, eps, sched);
    return fidelity_gradient_core(state.x, state.t, x0, gset.items[item].y_acute,
                                  state.stds[item], den, sched);
}

StdGradient std_gradient(const SamplerState& state, const GuidanceSet& gset, int item,
                         const Denoiser& den, const DiffusionSchedule& sched) {
    check_item_active(state, gset, item, "std_gradient");
    Image eps = den.eps(state.x, state.t);
    Image x0 = predict_x0(state.x, state.t, eps, sched);
    return std_gradient_core(x0, gset.items[item].y_acute, state.stds[item]);
}

void guided_step(SamplerState& state, const GuidanceSet& gset, const ScaleAdjuster& adjuster,
                 const Denoiser& den, const DiffusionSchedule& sched, const GuidanceConfig& cfg,
                 StepInfo* info) {
    int t = state.t;
    if (t < 1) throw std::invalid_argument("guided_step: t must be >= 1");
    if (state.stds.size() != gset.items.size())
        throw std::invalid_argument("guided_step: state stds do not match guidance set");

    Image eps = den.eps(state.x, t);
    Image x0 = predict_x0(state.x, t, eps, sched);
    Image noise = state.rng.gaussian_image(state.x.height, state.x.width, state.x.channels);
    Image x_prev = reverse_step_mean(state.x, t, eps, noise, sched);

    std::vector<int> active = gset.active_items(t);
    if (active.empty())
        throw std::logic_error("guided_step: no active guidance item at t=" + std::to_string(t));
    double wsum = 0.0;
    for (int i : active) wsum += gset.items[i].weight;

    Image scale_map = adjuster.adjust(gset.items[0].y_acute, x0, t);

    if (info) {
        info->active.assign(gset.items.size(), false);
        info->grad_norms.assign(gset.items.size(), 0.0);
        GaussianKernel k0 = make_kernel(state.stds[0]);
        info->residual = mean_sq_diff(convolve(x0, k0), gset.items[0].y_acute);
        info->mean_scale = mean(scale_map);
    }

    Image total_grad(state.x.height, state.x.width, state.x.channels);
    for (int i : active) {
        double w = gset.items[i].weight / wsum;
        Image g = fidelity_gradient_core(state.x, t, x0, gset.items[i].y_acute, state.stds[i],
                                         den, sched);
        for (std::size_t p = 0; p < total_grad.data.size(); ++p)
            total_grad.data[p] += w * g.data[p];
        if (info) {
            info->active[i] = true;
            info->grad_norms[i] = std::sqrt(dot(g, g));
        }
    }

    for (std::size_t p = 0; p < x_prev.data.size(); ++p)
        x_prev.data[p] -= cfg.s_base * scale_map.data[p] * total_grad.data[p];

    if (cfg.refine_std) {
        double sq_ab = std::sqrt(sched.alpha_bar[t]);
        for (int i : active) {
            double w = gset.items[i].weight / wsum;
            StdGradient g = std_gradient_core(x0, gset.items[i].y_acute, state.stds[i]);
            if (g.skipped) continue;
            double delta = sq_ab * w * cfg.std_lr * g.value;
            delta = std::clamp(delta, -cfg.std_max_step, cfg.std_max_step);
            state.stds[i] =
                std::clamp(state.stds[i] - delta, cfg.std_clamp_min, cfg.std_clamp_max);
        }
    }

    state.x = std::move(x_prev);
    state.t = t - 1;
}

Image unguided_chain(Image x, int t_from, const Denoiser& den, const DiffusionSchedule& sched,
                     Rng& rng) {
    for (int t = t_from; t >= 1; --t) {
        Image eps = den.eps(x, t);
        Image noise = rng.gaussian_image(x.height, x.width, x.channels);
        x = reverse_step_mean(x, t, eps, noise, sched);
    }
    return x;
}

std::vector<double> default_lambda(int n) {
    switch (n) {
        case 1: return {1.0};
        case 2: return {0.8, 0.2};
        case 3: return {0.7, 0.2, 0.1};
        case 4: return {0.7, 0.1, 0.1, 0.1};
        default: {
            // heaviest-blur source keeps the bulk, the rest share evenly
            std::vector<double> w(n, 0.3 / (n - 1));
            w[0] = 0.7;
            return w;
        }
    }
}

RestorationResult run_restoration(const Image& y, const PipelineComponents& pc,
                                  std::uint64_t seed) {
    if (!pc.restorer || !pc.estimator || !pc.adjuster || !pc.denoiser || !pc.sched)
        throw std::invalid_argument("run_restoration: missing pipeline component");
    if (pc.use_start_table && !pc.table)
        throw std::invalid_argument("run_restoration: missing start-step table");
    if (pc.n_guidance < 1) throw std::invalid_argument("run_restoration: n_guidance must be >= 1");
    if (static_cast<int>(pc.lambda.size()) < pc.n_guidance ||
        static_cast<int>(pc.std_offsets.size()) < pc.n_guidance)
        throw std::invalid_argument("run_restoration: lambda/std_offsets shorter than n_guidance");

    RestorationResult res;

    StdEstimate est = pc.estimator->estimate(y);
    res.std_hat = est.std_hat;

    Image restored = pc.restorer->restore(y);

    GuidanceSet gset;
    for (int i = 0; i < pc.n_guidance; ++i) {
        GuidanceItem item;
        item.std = pc.grid.snap(std::max(pc.grid.min, est.std_hat - pc.std_offsets[i]));
        item.weight = pc.lambda[i];
        item.y_acute = convolve(restored, make_kernel(item.std));
        item.t_start =
            pc.use_start_table ? lookup(*pc.table, item.std).t_start : pc.sched->T - 1;
        gset.items.push_back(std::move(item));
    }
    gset.validate();

    int t_start = gset.items[0].t_start;
    res.t_start = t_start;
    std::vector<double> stds;
    for (const auto& item : gset.items) stds.push_back(item.std);
    res.initial_stds = stds;

    SamplerState state(Image(y.height, y.width, y.channels), t_start, stds, seed);
    Image init_noise = state.rng.gaussian_image(y.height, y.width, y.channels);
    state.x = q_sample(gset.items[0].y_acute, t_start, init_noise, *pc.sched);

    std::ofstream trace;
    if (!pc.trace_path.empty()) {
        trace.open(pc.trace_path);
        if (!trace)
            throw std::runtime_error("run_restoration: cannot open trace file " + pc.trace_path);
        trace.precision(10);
    }

    while (state.t >= 1) {
        StepInfo info;
        guided_step(state, gset, *pc.adjuster, *pc.denoiser, *pc.sched, pc.guidance,
                    trace.is_open() ? &info : nullptr);
        if (trace.is_open()) {
            trace << (state.t + 1) << "\t" << info.residual << "\t";
            for (std::size_t i = 0; i < state.stds.size(); ++i)
                trace << (i ? "," : "") << state.stds[i];
            trace << "\t" << info.mean_scale << "\n";
        }
    }

    res.final_stds = state.stds;
    res.out = clamp01(state.x);
    return res;
}

}  // namespace gdr
