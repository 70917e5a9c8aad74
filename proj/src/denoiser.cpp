#include "gdr/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gdr/io.hpp"

namespace gdr {

void GmmPrior::validate() const {
    if (components.empty())
        throw std::invalid_argument("GmmPrior: empty prior");
    double wsum = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0)) throw std::invalid_argument("GmmPrior: weights must be positive");
        if (!(c.var > 0.0)) throw std::invalid_argument("GmmPrior: variances must be positive");
        if (!c.mean.same_shape(components.front().mean))
            throw std::invalid_argument("GmmPrior: all means must share one shape");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("GmmPrior: weights must sum to 1");
}

Image GmmPrior::mixture_mean() const {
    validate();
    Image m(components.front().mean.height, components.front().mean.width,
            components.front().mean.channels);
    for (const auto& c : components)
        for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] += c.weight * c.mean.data[i];
    return m;
}

double GmmPrior::mixture_scalar_mean() const {
    Image m = mixture_mean();
    return mean(m);
}

double GmmPrior::mixture_scalar_second_moment() const {
    validate();
    double s = 0.0;
    for (const auto& c : components) {
        double ms = 0.0;
        for (double v : c.mean.data) ms += v * v;
        ms /= static_cast<double>(c.mean.data.size());
        s += c.weight * (ms + c.var);
    }
    return s;
}

void GmmPrior::save(const std::string& dir) const {
    validate();
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir + "/manifest.tsv");
    if (!manifest) throw std::runtime_error("GmmPrior::save: cannot open manifest in " + dir);
    manifest.precision(17);
    for (std::size_t i = 0; i < components.size(); ++i) {
        std::string name = "mean_" + std::to_string(i) + ".bgt";
        write_tensor(dir + "/" + name, components[i].mean);
        manifest << components[i].weight << "\t" << components[i].var << "\t" << name << "\n";
    }
}

GmmPrior GmmPrior::load(const std::string& dir) {
    std::ifstream manifest(dir + "/manifest.tsv");
    if (!manifest) throw std::runtime_error("GmmPrior::load: cannot open manifest in " + dir);
    GmmPrior p;
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        GmmComponent c;
        std::string name;
        if (!(ss >> c.weight >> c.var >> name))
            throw std::runtime_error("GmmPrior::load: malformed manifest line: " + line);
        c.mean = read_tensor(dir + "/" + name);
        p.components.push_back(std::move(c));
    }
    p.validate();
    return p;
}

GmmDenoiser::GmmDenoiser(GmmPrior prior, const DiffusionSchedule& sched)
    : prior_(std::move(prior)), sched_(&sched) {
    prior_.validate();
}

namespace {

struct GmmWork {
    double ab = 0.0;         // alpha_bar[t]
    double sq_ab = 0.0;      // sqrt(ab)
    double sq_1m = 0.0;      // sqrt(1-ab)
    std::vector<double> s;   // ab*var_j + (1-ab), per component
    std::vector<double> r;   // responsibilities
};

GmmWork responsibilities(const GmmPrior& prior, const Image& x, int t,
                         const DiffusionSchedule& sched) {
    if (t < 0 || t >= sched.T)
        throw std::invalid_argument("GmmDenoiser: timestep out of range");
    const auto& comps = prior.components;
    if (!x.same_shape(comps.front().mean))
        throw std::invalid_argument("GmmDenoiser: input shape does not match prior means");

    GmmWork w;
    w.ab = sched.alpha_bar[t];
    w.sq_ab = std::sqrt(w.ab);
    w.sq_1m = std::sqrt(1.0 - w.ab);
    std::size_t n = x.data.size();

    std::vector<double> loglik(comps.size());
    w.s.resize(comps.size());
    for (std::size_t j = 0; j < comps.size(); ++j) {
        double s = w.ab * comps[j].var + (1.0 - w.ab);
        w.s[j] = s;
        double sse = 0.0;
        const double* mu = comps[j].mean.data.data();
        const double* xv = x.data.data();
        for (std::size_t i = 0; i < n; ++i) {
            double d = xv[i] - w.sq_ab * mu[i];
            sse += d * d;
        }
        loglik[j] = std::log(comps[j].weight) -
                    0.5 * static_cast<double>(n) * std::log(6.283185307179586 * s) -
                    0.5 * sse / s;
    }
    double mx = *std::max_element(loglik.begin(), loglik.end());
    double z = 0.0;
    w.r.resize(comps.size());
    for (std::size_t j = 0; j < comps.size(); ++j) {
        w.r[j] = std::exp(loglik[j] - mx);
        z += w.r[j];
    }
    for (double& v : w.r) v /= z;
    return w;
}

}  // namespace

Image GmmDenoiser::posterior_mean(const Image& x_t, int t) const {
    GmmWork w = responsibilities(prior_, x_t, t, *sched_);
    const auto& comps = prior_.components;
    std::size_t n = x_t.data.size();
    Image m(x_t.height, x_t.width, x_t.channels);
    for (std::size_t j = 0; j < comps.size(); ++j) {
        double a = w.sq_ab * comps[j].var / w.s[j];
        double b = (1.0 - w.ab) / w.s[j];
        const double* mu = comps[j].mean.data.data();
        for (std::size_t i = 0; i < n; ++i)
            m.data[i] += w.r[j] * (a * x_t.data[i] + b * mu[i]);
    }
    return m;
}

Image GmmDenoiser::eps(const Image& x_t, int t) const {
    Image m = posterior_mean(x_t, t);
    double ab = sched_->alpha_bar[t];
    double sq_ab = std::sqrt(ab);
    double sq_1m = std::sqrt(1.0 - ab);
    Image out(x_t.height, x_t.width, x_t.channels);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (x_t.data[i] - sq_ab * m.data[i]) / sq_1m;
    return out;
}

Image GmmDenoiser::vjp(const Image& x_t, int t, const Image& cotangent) const {
    require_same_shape(x_t, cotangent, "GmmDenoiser::vjp");
    GmmWork w = responsibilities(prior_, x_t, t, *sched_);
    const auto& comps = prior_.components;
    std::size_t n = x_t.data.size();

    // m(x) = sum_j r_j(x) m_j(x), m_j = a_j x + b_j mu_j.
    // dm^T u = (sum_j r_j a_j) u + sum_j r_j <m_j,u> (g_j - gbar),
    // g_j = dloglik_j/dx = -(x - sqrt(ab) mu_j)/s_j.
    double A = 0.0;
    std::vector<double> mdotu(comps.size(), 0.0);
    for (std::size_t j = 0; j < comps.size(); ++j) {
        double a = w.sq_ab * comps[j].var / w.s[j];
        double b = (1.0 - w.ab) / w.s[j];
        A += w.r[j] * a;
        const double* mu = comps[j].mean.data.data();
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += (a * x_t.data[i] + b * mu[i]) * cotangent.data[i];
        mdotu[j] = acc;
    }

    Image jmu(x_t.height, x_t.width, x_t.channels);
    for (std::size_t i = 0; i < n; ++i) jmu.data[i] = A * cotangent.data[i];

    if (comps.size() > 1) {
        std::vector<double> gbar(n, 0.0);
        std::vector<std::vector<double>> g(comps.size(), std::vector<double>(n));
        for (std::size_t j = 0; j < comps.size(); ++j) {
            const double* mu = comps[j].mean.data.data();
            double inv_s = 1.0 / w.s[j];
            for (std::size_t i = 0; i < n; ++i) {
                g[j][i] = -(x_t.data[i] - w.sq_ab * mu[i]) * inv_s;
                gbar[i] += w.r[j] * g[j][i];
            }
        }
        for (std::size_t j = 0; j < comps.size(); ++j) {
            double coef = w.r[j] * mdotu[j];
            for (std::size_t i = 0; i < n; ++i) jmu.data[i] += coef * (g[j][i] - gbar[i]);
        }
    }

    Image out(x_t.height, x_t.width, x_t.channels);
    for (std::size_t i = 0; i < n; ++i)
        out.data[i] = (cotangent.data[i] - w.sq_ab * jmu.data[i]) / w.sq_1m;
    return out;
}

Image finite_diff_vjp(const Denoiser& den, const Image& x_t, int t, const Image& cotangent,
                      double step, const std::vector<int>& subset) {
    require_same_shape(x_t, cotangent, "finite_diff_vjp");
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_vjp: step must be > 0");
    if (subset.empty()) throw std::invalid_argument("finite_diff_vjp: empty pixel subset");
    Image out(x_t.height, x_t.width, x_t.channels);
    Image probe = x_t;
    for (int idx : subset) {
        if (idx < 0 || idx >= static_cast<int>(x_t.data.size()))
            throw std::invalid_argument("finite_diff_vjp: subset index out of range");
        double saved = probe.data[idx];
        probe.data[idx] = saved + step;
        double fp = dot(den.eps(probe, t), cotangent);
        probe.data[idx] = saved - step;
        double fm = dot(den.eps(probe, t), cotangent);
        probe.data[idx] = saved;
        out.data[idx] = (fp - fm) / (2.0 * step);
    }
    return out;
}

}  // namespace gdr
