#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "gdr/gaussian.hpp"
#include "gdr/restorer.hpp"

namespace gdr {

namespace {

// FFTW planning is not thread safe; execution on distinct plans is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// 1-D transfer function of the symmetric taps at frequency index u of an
// n-point DFT.
double taps_response(const std::vector<double>& taps, int u, int n) {
    int radius = (static_cast<int>(taps.size()) - 1) / 2;
    double h = taps[radius];
    for (int d = 1; d <= radius; ++d)
        h += 2.0 * taps[d + radius] * std::cos(2.0 * M_PI * u * d / n);
    return h;
}

}  // namespace

WienerRestorer::WienerRestorer(double assumed_std, double noise_power)
    : assumed_std_(assumed_std), noise_power_(noise_power) {
    if (assumed_std < 0.0)
        throw std::invalid_argument("WienerRestorer: assumed_std must be >= 0");
    if (noise_power < 0.0)
        throw std::invalid_argument("WienerRestorer: noise_power must be >= 0");
}

Image WienerRestorer::restore(const Image& y) const {
    if (y.empty()) throw std::invalid_argument("WienerRestorer: empty image");
    GaussianKernel k = make_kernel(assumed_std_);
    if (k.is_delta()) return y;

    int H = y.height, W = y.width;
    int eh = 2 * H, ew = 2 * W;
    int ncplx = eh * (ew / 2 + 1);

    std::vector<double> real(static_cast<std::size_t>(eh) * ew);
    std::vector<std::complex<double>> cplx(ncplx);

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fwd = fftw_plan_dft_r2c_2d(eh, ew, real.data(),
                                   reinterpret_cast<fftw_complex*>(cplx.data()), FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(eh, ew, reinterpret_cast<fftw_complex*>(cplx.data()),
                                   real.data(), FFTW_ESTIMATE);
    }

    // precompute per-axis responses; 2-D OTF factorizes for separable kernels
    std::vector<double> hv(eh), hh(ew);
    for (int u = 0; u < eh; ++u) hv[u] = taps_response(k.taps, u, eh);
    for (int u = 0; u < ew; ++u) hh[u] = taps_response(k.taps, u, ew);

    Image out(H, W, y.channels);
    for (int c = 0; c < y.channels; ++c) {
        // half-sample symmetric extension makes the circular blur of the
        // extension match the reflect-boundary blur of the interior
        for (int i = 0; i < eh; ++i) {
            int yi = (i < H) ? i : eh - 1 - i;
            for (int j = 0; j < ew; ++j) {
                int xj = (j < W) ? j : ew - 1 - j;
                real[static_cast<std::size_t>(i) * ew + j] = y.at(yi, xj, c);
            }
        }
        fftw_execute(fwd);
        for (int u = 0; u < eh; ++u) {
            for (int v = 0; v <= ew / 2; ++v) {
                double h = hv[u] * hh[v];
                double wfilt;
                if (u == 0 && v == 0)
                    wfilt = 1.0 / h;  // h(0,0) = 1; keep the mean exact
                else
                    wfilt = h / (h * h + noise_power_);
                cplx[static_cast<std::size_t>(u) * (ew / 2 + 1) + v] *= wfilt;
            }
        }
        fftw_execute(bwd);
        double norm = 1.0 / (static_cast<double>(eh) * ew);
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j)
                out.at(i, j, c) = real[static_cast<std::size_t>(i) * ew + j] * norm;
    }

    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    return out;
}

}  // namespace gdr
