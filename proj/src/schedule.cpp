#include "gdr/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gdr {

namespace {

void check_t(int t, const DiffusionSchedule& sched, const char* where) {
    if (t < 0 || t >= sched.T)
        throw std::invalid_argument(std::string(where) + ": timestep " + std::to_string(t) +
                                    " outside [0," + std::to_string(sched.T - 1) + "]");
}

}  // namespace

DiffusionSchedule make_schedule(int T, double beta_start, double beta_end) {
    if (T < 2) throw std::invalid_argument("make_schedule: T must be >= 2");
    if (!(beta_start > 0.0)) throw std::invalid_argument("make_schedule: beta_start must be > 0");
    if (!(beta_end < 1.0)) throw std::invalid_argument("make_schedule: beta_end must be < 1");
    if (beta_start > beta_end)
        throw std::invalid_argument("make_schedule: beta_start must be <= beta_end");

    DiffusionSchedule s;
    s.T = T;
    s.beta.resize(T);
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    s.sigma.resize(T);

    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        s.beta[t] = beta_start + (beta_end - beta_start) * static_cast<double>(t) /
                                     static_cast<double>(T - 1);
        s.alpha[t] = 1.0 - s.beta[t];
        prod *= s.alpha[t];
        s.alpha_bar[t] = prod;
        s.sigma[t] = std::sqrt(s.beta[t]);
    }
    return s;
}

Image q_sample(const Image& x0, int t, const Image& noise, const DiffusionSchedule& sched) {
    check_t(t, sched, "q_sample");
    require_same_shape(x0, noise, "q_sample");
    double ab = sched.alpha_bar[t];
    double cs = std::sqrt(ab);
    double cn = std::sqrt(1.0 - ab);
    Image out = x0;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = cs * x0.data[i] + cn * noise.data[i];
    return out;
}

Image predict_x0(const Image& x_t, int t, const Image& eps, const DiffusionSchedule& sched) {
    check_t(t, sched, "predict_x0");
    require_same_shape(x_t, eps, "predict_x0");
    double ab = sched.alpha_bar[t];
    double cs = std::sqrt(ab);
    double cn = std::sqrt(1.0 - ab);
    Image out = x_t;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (x_t.data[i] - cn * eps.data[i]) / cs;
    return out;
}

Image reverse_step_mean(const Image& x_t, int t, const Image& eps, const Image& noise,
                        const DiffusionSchedule& sched) {
    if (t < 1)
        throw std::invalid_argument("reverse_step_mean: t must be >= 1, no step below 0");
    check_t(t, sched, "reverse_step_mean");
    require_same_shape(x_t, eps, "reverse_step_mean");
    require_same_shape(x_t, noise, "reverse_step_mean");
    double inv_sqrt_a = 1.0 / std::sqrt(sched.alpha[t]);
    double ce = sched.beta[t] / std::sqrt(1.0 - sched.alpha_bar[t]);
    double cn = (t == 1) ? 0.0 : sched.sigma[t];
    Image out = x_t;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = inv_sqrt_a * (x_t.data[i] - ce * eps.data[i]) + cn * noise.data[i];
    return out;
}

}  // namespace gdr
