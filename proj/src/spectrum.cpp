#include "gdr/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "gdr/rng.hpp"

namespace gdr {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// mean power per radial bin; bins cover [0, 0.5] cycles/pixel
std::vector<double> radial_power(const Image& img) {
    int H = img.height, W = img.width;
    int nb = std::min(H, W) / 2;
    if (nb < 4) throw std::invalid_argument("radial_power: image too small");

    std::vector<double> gray(static_cast<std::size_t>(H) * W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double s = 0.0;
            for (int c = 0; c < img.channels; ++c) s += img.at(y, x, c);
            gray[static_cast<std::size_t>(y) * W + x] = s / img.channels;
        }
    double m = 0.0;
    for (double v : gray) m += v;
    m /= gray.size();
    for (double& v : gray) v -= m;

    std::vector<std::complex<double>> spec(static_cast<std::size_t>(H) * (W / 2 + 1));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_r2c_2d(H, W, gray.data(),
                                    reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }

    std::vector<double> acc(nb, 0.0);
    std::vector<int> cnt(nb, 0);
    for (int u = 0; u < H; ++u) {
        double fu = static_cast<double>(u <= H / 2 ? u : H - u) / H;
        for (int v = 0; v <= W / 2; ++v) {
            double fv = static_cast<double>(v) / W;
            double f = std::hypot(fu, fv);
            if (f <= 0.0 || f > 0.5) continue;
            int b = std::min(nb - 1, static_cast<int>(f / 0.5 * nb));
            double p = std::norm(spec[static_cast<std::size_t>(u) * (W / 2 + 1) + v]);
            // r2c stores half the plane; interior columns stand for two bins
            double mult = (v == 0 || v == W / 2) ? 1.0 : 2.0;
            acc[b] += mult * p;
            cnt[b] += static_cast<int>(mult);
        }
    }
    for (int b = 0; b < nb; ++b) acc[b] = cnt[b] > 0 ? acc[b] / cnt[b] : 0.0;
    return acc;
}

constexpr double kLogFloor = 1e-14;

// DTFT of the symmetric taps at continuous frequency f (cycles/pixel)
double taps_response_cont(const std::vector<double>& taps, double f) {
    int radius = (static_cast<int>(taps.size()) - 1) / 2;
    double h = taps[radius];
    for (int d = 1; d <= radius; ++d)
        h += 2.0 * taps[d + radius] * std::cos(2.0 * M_PI * f * d);
    return h;
}

}  // namespace

void RadialSpectrum::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("RadialSpectrum::save: cannot open " + path);
    out.precision(17);
    for (std::size_t b = 0; b < log_power.size(); ++b)
        out << b << "\t" << log_power[b] << "\n";
}

RadialSpectrum RadialSpectrum::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("RadialSpectrum::load: cannot open " + path);
    RadialSpectrum s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int bin;
        double lp;
        if (!(ss >> bin >> lp))
            throw std::runtime_error("RadialSpectrum::load: malformed line: " + line);
        s.log_power.push_back(lp);
    }
    if (s.log_power.empty()) throw std::runtime_error("RadialSpectrum::load: empty file " + path);
    return s;
}

RadialSpectrum radial_log_spectrum(const Image& img) {
    std::vector<double> p = radial_power(img);
    double total = 0.0;
    for (double v : p) total += v;
    if (total < 1e-20)
        throw EstimationError(EstimationErrorCode::degenerate_spectrum,
                              "radial_log_spectrum: constant image has no spectrum");
    RadialSpectrum s;
    s.log_power.resize(p.size());
    for (std::size_t b = 0; b < p.size(); ++b) s.log_power[b] = std::log(p[b] + kLogFloor);
    return s;
}

RadialSpectrum corpus_reference_spectrum(const std::vector<Image>& corpus) {
    if (corpus.empty())
        throw std::invalid_argument("corpus_reference_spectrum: empty corpus");
    std::vector<double> acc;
    for (const Image& img : corpus) {
        std::vector<double> p = radial_power(img);
        if (acc.empty()) acc.resize(p.size(), 0.0);
        if (p.size() != acc.size())
            throw std::invalid_argument("corpus_reference_spectrum: mixed image sizes");
        for (std::size_t b = 0; b < p.size(); ++b) acc[b] += p[b];
    }
    RadialSpectrum s;
    s.log_power.resize(acc.size());
    for (std::size_t b = 0; b < acc.size(); ++b)
        s.log_power[b] = std::log(acc[b] / corpus.size() + kLogFloor);
    return s;
}

SpectralStdEstimator::SpectralStdEstimator(RadialSpectrum reference, StdGrid grid,
                                           const Restorer* restorer)
    : ref_(std::move(reference)), grid_(grid), restorer_(restorer) {
    if (ref_.log_power.empty())
        throw std::invalid_argument("SpectralStdEstimator: empty reference spectrum");
}

StdEstimate SpectralStdEstimator::estimate(const Image& y) const {
    RadialSpectrum sy = radial_log_spectrum(y);
    int nb = std::min(sy.bins(), ref_.bins());

    // attenuation observed per bin, fitted with a free per-image offset
    // against the kernel transfer model; bins below the model floor are
    // noise-dominated and excluded per candidate
    int b_lo = 1;
    int b_hi = std::max(b_lo + 3, static_cast<int>(0.7 * nb));
    b_hi = std::min(b_hi, nb - 1);
    constexpr double kModelFloor = -9.0;

    double best_sse = 0.0, best_std = grid_.min;
    bool have_best = false;
    for (double cand : grid_.values()) {
        GaussianKernel k = make_kernel(std::max(cand, kDeltaStd));
        std::vector<double> model, obs;
        for (int b = b_lo; b <= b_hi; ++b) {
            double f = ref_.bin_frequency(b);
            double h = taps_response_cont(k.taps, f);
            double lm = 2.0 * std::log(std::max(h, 1e-12));
            if (lm < kModelFloor) continue;
            model.push_back(lm);
            obs.push_back(sy.log_power[b] - ref_.log_power[b]);
        }
        if (model.size() < 4) continue;
        double offset = 0.0;
        for (std::size_t i = 0; i < model.size(); ++i) offset += obs[i] - model[i];
        offset /= model.size();
        double sse = 0.0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            double r = obs[i] - model[i] - offset;
            sse += r * r;
        }
        sse /= model.size();
        if (!have_best || sse < best_sse) {
            have_best = true;
            best_sse = sse;
            best_std = cand;
        }
    }
    if (!have_best)
        throw EstimationError(EstimationErrorCode::degenerate_spectrum,
                              "SpectralStdEstimator: no candidate std had enough usable bins");

    StdEstimate est;
    est.std_hat = grid_.snap(best_std);
    Image base = restorer_ ? restorer_->restore(y) : y;
    est.intermediate = convolve(base, make_kernel(est.std_hat));
    return est;
}

namespace {

std::vector<double> spectrum_features(const Image& y, const RadialSpectrum& ref) {
    RadialSpectrum sy = radial_log_spectrum(y);
    int nb = std::min(sy.bins(), ref.bins());
    std::vector<double> f;
    f.reserve(nb - 1);
    for (int b = 1; b < nb; ++b) {
        double d = sy.log_power[b] - ref.log_power[b];
        f.push_back(0.1 * std::clamp(d, -14.0, 4.0));
    }
    return f;
}

}  // namespace

std::vector<double> TrainedStdEstimator::features(const Image& y) const {
    return spectrum_features(y, ref_);
}

double TrainedStdEstimator::predict(const std::vector<double>& f) const {
    double out = b2_;
    int nf = static_cast<int>(f.size());
    for (int h = 0; h < hidden_; ++h) {
        double z = b1_[h];
        for (int i = 0; i < nf; ++i) z += w1_[static_cast<std::size_t>(h) * nf + i] * f[i];
        out += w2_[h] * std::tanh(z);
    }
    return out;
}

StdEstimate TrainedStdEstimator::estimate(const Image& y) const {
    std::vector<double> f = features(y);
    double raw = predict(f);
    StdEstimate est;
    est.std_hat = grid_.snap(raw);
    est.intermediate = convolve(y, make_kernel(est.std_hat));
    return est;
}

void TrainedStdEstimator::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("TrainedStdEstimator::save: cannot open " + path);
    out.precision(17);
    out << "sde " << hidden_ << " " << w1_.size() << "\n";
    out << grid_.min << " " << grid_.max << " " << grid_.step << "\n";
    out << ref_.log_power.size();
    for (double v : ref_.log_power) out << " " << v;
    out << "\n";
    for (double v : w1_) out << v << " ";
    out << "\n";
    for (double v : b1_) out << v << " ";
    out << "\n";
    for (double v : w2_) out << v << " ";
    out << "\n" << b2_ << "\n";
}

TrainedStdEstimator TrainedStdEstimator::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("TrainedStdEstimator::load: cannot open " + path);
    std::string tag;
    std::size_t w1n;
    TrainedStdEstimator e;
    if (!(in >> tag >> e.hidden_ >> w1n) || tag != "sde")
        throw std::runtime_error("TrainedStdEstimator::load: bad header in " + path);
    in >> e.grid_.min >> e.grid_.max >> e.grid_.step;
    std::size_t nb;
    in >> nb;
    e.ref_.log_power.resize(nb);
    for (double& v : e.ref_.log_power) in >> v;
    e.w1_.resize(w1n);
    for (double& v : e.w1_) in >> v;
    e.b1_.resize(e.hidden_);
    for (double& v : e.b1_) in >> v;
    e.w2_.resize(e.hidden_);
    for (double& v : e.w2_) in >> v;
    in >> e.b2_;
    if (!in) throw std::runtime_error("TrainedStdEstimator::load: truncated file " + path);
    return e;
}

TrainedStdEstimator train_sde(const std::vector<Image>& corpus, const StdGrid& grid,
                              int iterations, std::uint64_t seed) {
    if (corpus.empty()) throw std::invalid_argument("train_sde: empty corpus");
    if (iterations < 1) throw std::invalid_argument("train_sde: iterations must be >= 1");

    TrainedStdEstimator e;
    e.ref_ = corpus_reference_spectrum(corpus);
    e.grid_ = grid;
    e.hidden_ = 24;

    int nf = static_cast<int>(spectrum_features(corpus.front(), e.ref_).size());
    Rng rng(seed);
    e.w1_.resize(static_cast<std::size_t>(e.hidden_) * nf);
    e.b1_.assign(e.hidden_, 0.0);
    e.w2_.resize(e.hidden_);
    double scale = std::sqrt(2.0 / nf);
    for (double& v : e.w1_) v = scale * rng.gaussian();
    for (double& v : e.w2_) v = 0.3 * rng.gaussian();
    e.b2_ = 0.5 * (grid.min + grid.max);

    std::vector<double> vw1(e.w1_.size(), 0.0), vb1(e.hidden_, 0.0), vw2(e.hidden_, 0.0);
    double vb2 = 0.0;
    const double momentum = 0.9;

    for (int it = 0; it < iterations; ++it) {
        double lr = 0.02 / (1.0 + 4.0 * it / iterations);
        const Image& x = corpus[static_cast<std::size_t>(rng.uniform_int(0, corpus.size() - 1))];
        double target = rng.uniform(grid.min, grid.max);
        Image blurred = convolve(x, make_kernel(target));
        std::vector<double> f = spectrum_features(blurred, e.ref_);

        std::vector<double> z(e.hidden_), a(e.hidden_);
        double pred = e.b2_;
        for (int h = 0; h < e.hidden_; ++h) {
            double zz = e.b1_[h];
            for (int i = 0; i < nf; ++i) zz += e.w1_[static_cast<std::size_t>(h) * nf + i] * f[i];
            z[h] = zz;
            a[h] = std::tanh(zz);
            pred += e.w2_[h] * a[h];
        }
        double derr = 2.0 * (pred - target);

        for (int h = 0; h < e.hidden_; ++h) {
            double gw2 = derr * a[h];
            double dz = derr * e.w2_[h] * (1.0 - a[h] * a[h]);
            vw2[h] = momentum * vw2[h] - lr * gw2;
            e.w2_[h] += vw2[h];
            vb1[h] = momentum * vb1[h] - lr * dz;
            e.b1_[h] += vb1[h];
            for (int i = 0; i < nf; ++i) {
                std::size_t idx = static_cast<std::size_t>(h) * nf + i;
                vw1[idx] = momentum * vw1[idx] - lr * dz * f[i];
                e.w1_[idx] += vw1[idx];
            }
        }
        vb2 = momentum * vb2 - lr * derr;
        e.b2_ += vb2;
    }
    return e;
}

}  // namespace gdr
