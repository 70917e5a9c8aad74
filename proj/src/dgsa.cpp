#include "gdr/dgsa.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "gdr/blur_map.hpp"
#include "gdr/rng.hpp"

namespace gdr {

// ---------------------------------------------------------------- loss ----

namespace {

constexpr double kGmsC = 0.0026;
constexpr double kGradEps = 1e-12;

// zero-padded 3x3 correlation and its exact adjoint
Image corr3x3(const Image& img, const double k[3][3]) {
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int yy = y + dy, xx = x + dx;
                        if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) continue;
                        acc += k[dy + 1][dx + 1] * img.at(yy, xx, c);
                    }
                out.at(y, x, c) = acc;
            }
    return out;
}

Image corr3x3_adjoint(const Image& u, const double k[3][3]) {
    double kf[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) kf[i][j] = k[2 - i][2 - j];
    return corr3x3(u, kf);
}

const double kSobelX[3][3] = {{-0.125, 0.0, 0.125}, {-0.25, 0.0, 0.25}, {-0.125, 0.0, 0.125}};
const double kSobelY[3][3] = {{-0.125, -0.25, -0.125}, {0.0, 0.0, 0.0}, {0.125, 0.25, 0.125}};

struct GmsParts {
    Image gax, gay, ga;  // gradient components and magnitude of a
    Image gb;            // magnitude of b
    double value = 0.0;
};

GmsParts gms_parts(const Image& a, const Image& b) {
    GmsParts p;
    p.gax = corr3x3(a, kSobelX);
    p.gay = corr3x3(a, kSobelY);
    Image gbx = corr3x3(b, kSobelX);
    Image gby = corr3x3(b, kSobelY);
    p.ga = Image(a.height, a.width, a.channels);
    p.gb = Image(a.height, a.width, a.channels);
    double ssum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double ga = std::sqrt(p.gax.data[i] * p.gax.data[i] + p.gay.data[i] * p.gay.data[i] +
                              kGradEps);
        double gb = std::sqrt(gbx.data[i] * gbx.data[i] + gby.data[i] * gby.data[i] + kGradEps);
        p.ga.data[i] = ga;
        p.gb.data[i] = gb;
        ssum += (2.0 * ga * gb + kGmsC) / (ga * ga + gb * gb + kGmsC);
    }
    p.value = 1.0 - ssum / static_cast<double>(a.data.size());
    return p;
}

}  // namespace

double gms_distance(const Image& a, const Image& b) {
    require_same_shape(a, b, "gms_distance");
    return gms_parts(a, b).value;
}

double dgsa_loss(const Image& pred, const Image& target, const std::array<double, 4>& gamma) {
    require_same_shape(pred, target, "dgsa_loss");
    SwtBands bp = swt_decompose(pred);
    SwtBands bt = swt_decompose(target);
    const Image* p[4] = {&bp.ll, &bp.lh, &bp.hl, &bp.hh};
    const Image* q[4] = {&bt.ll, &bt.lh, &bt.hl, &bt.hh};
    double loss = 0.0;
    for (int i = 0; i < 4; ++i) loss += gamma[i] * mean_abs_diff(*p[i], *q[i]);
    return loss + gms_distance(pred, target);
}

double dgsa_loss_grad(const Image& pred, const Image& target, const std::array<double, 4>& gamma,
                      Image* grad) {
    require_same_shape(pred, target, "dgsa_loss_grad");
    SwtBands bp = swt_decompose(pred);
    SwtBands bt = swt_decompose(target);
    const Image* p[4] = {&bp.ll, &bp.lh, &bp.hl, &bp.hh};
    const Image* q[4] = {&bt.ll, &bt.lh, &bt.hl, &bt.hh};

    Image g(pred.height, pred.width, pred.channels);
    double loss = 0.0;
    double inv_n = 1.0 / static_cast<double>(pred.data.size());
    for (int i = 0; i < 4; ++i) {
        if (gamma[i] == 0.0) {
            loss += gamma[i] * mean_abs_diff(*p[i], *q[i]);
            continue;
        }
        Image sgn(pred.height, pred.width, pred.channels);
        double acc = 0.0;
        for (std::size_t k = 0; k < sgn.data.size(); ++k) {
            double d = p[i]->data[k] - q[i]->data[k];
            acc += std::abs(d);
            sgn.data[k] = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        }
        loss += gamma[i] * acc * inv_n;
        Image adj = swt_band_adjoint(sgn, i);
        for (std::size_t k = 0; k < g.data.size(); ++k)
            g.data[k] += gamma[i] * inv_n * adj.data[k];
    }

    GmsParts gp = gms_parts(pred, target);
    loss += gp.value;
    Image dgx(pred.height, pred.width, pred.channels);
    Image dgy(pred.height, pred.width, pred.channels);
    for (std::size_t k = 0; k < g.data.size(); ++k) {
        double ga = gp.ga.data[k], gb = gp.gb.data[k];
        double den = ga * ga + gb * gb + kGmsC;
        double ds_dga = (2.0 * gb * den - (2.0 * ga * gb + kGmsC) * 2.0 * ga) / (den * den);
        double dl_dga = -inv_n * ds_dga;
        dgx.data[k] = dl_dga * gp.gax.data[k] / ga;
        dgy.data[k] = dl_dga * gp.gay.data[k] / ga;
    }
    Image gx_adj = corr3x3_adjoint(dgx, kSobelX);
    Image gy_adj = corr3x3_adjoint(dgy, kSobelY);
    for (std::size_t k = 0; k < g.data.size(); ++k)
        g.data[k] += gx_adj.data[k] + gy_adj.data[k];

    if (grad) *grad = std::move(g);
    return loss;
}

// ----------------------------------------------------------------- net ----

namespace {

constexpr int kEmbed = ConvAdjuster::kHidden;

void time_embedding(int t, double* e) {
    for (int i = 0; i < kEmbed / 2; ++i) {
        double freq = std::exp(-std::log(10000.0) * i / (kEmbed / 2 - 1));
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
}

// planar tensors, plane stride H*W, weights [oc][ic][ky][kx]
void conv3x3_fwd(const double* in, int ic_n, const double* w, const double* b, double* out,
                 int oc_n, int H, int W) {
    int hw = H * W;
    for (int oc = 0; oc < oc_n; ++oc) {
        double* op = out + static_cast<std::size_t>(oc) * hw;
        std::fill(op, op + hw, b ? b[oc] : 0.0);
        for (int ic = 0; ic < ic_n; ++ic) {
            const double* ip = in + static_cast<std::size_t>(ic) * hw;
            const double* wk = w + (static_cast<std::size_t>(oc) * ic_n + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                int dy = ky - 1;
                for (int kx = 0; kx < 3; ++kx) {
                    int dx = kx - 1;
                    double wv = wk[ky * 3 + kx];
                    if (wv == 0.0) continue;
                    int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    for (int y = y0; y < y1; ++y) {
                        const double* src = ip + (y + dy) * W + (x0 + dx);
                        double* dst = op + y * W + x0;
                        for (int x = x0; x < x1; ++x) dst[x - x0] += wv * src[x - x0];
                    }
                }
            }
        }
    }
}

// din[ic][y+dy][x+dx] += w[oc][ic][ky][kx] * dout[oc][y][x]
void conv3x3_bwd_data(const double* dout, int oc_n, const double* w, double* din, int ic_n,
                      int H, int W) {
    int hw = H * W;
    std::fill(din, din + static_cast<std::size_t>(ic_n) * hw, 0.0);
    for (int oc = 0; oc < oc_n; ++oc) {
        const double* op = dout + static_cast<std::size_t>(oc) * hw;
        for (int ic = 0; ic < ic_n; ++ic) {
            double* ip = din + static_cast<std::size_t>(ic) * hw;
            const double* wk = w + (static_cast<std::size_t>(oc) * ic_n + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                int dy = ky - 1;
                for (int kx = 0; kx < 3; ++kx) {
                    int dx = kx - 1;
                    double wv = wk[ky * 3 + kx];
                    if (wv == 0.0) continue;
                    int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    for (int y = y0; y < y1; ++y) {
                        double* dst = ip + (y + dy) * W + (x0 + dx);
                        const double* src = op + y * W + x0;
                        for (int x = x0; x < x1; ++x) dst[x - x0] += wv * src[x - x0];
                    }
                }
            }
        }
    }
}

void conv3x3_bwd_weights(const double* in, int ic_n, const double* dout, int oc_n, double* gw,
                         double* gb, int H, int W) {
    int hw = H * W;
    for (int oc = 0; oc < oc_n; ++oc) {
        const double* op = dout + static_cast<std::size_t>(oc) * hw;
        if (gb) {
            double acc = 0.0;
            for (int i = 0; i < hw; ++i) acc += op[i];
            gb[oc] += acc;
        }
        for (int ic = 0; ic < ic_n; ++ic) {
            const double* ip = in + static_cast<std::size_t>(ic) * hw;
            double* wk = gw + (static_cast<std::size_t>(oc) * ic_n + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                int dy = ky - 1;
                for (int kx = 0; kx < 3; ++kx) {
                    int dx = kx - 1;
                    int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    double acc = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const double* src = ip + (y + dy) * W + (x0 + dx);
                        const double* dst = op + y * W + x0;
                        for (int x = x0; x < x1; ++x) acc += dst[x - x0] * src[x - x0];
                    }
                    wk[ky * 3 + kx] += acc;
                }
            }
        }
    }
}

double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
double elu_deriv(double z) { return z > 0.0 ? 1.0 : std::exp(z); }

}  // namespace

struct ConvAdjuster::Cache {
    int H = 0, W = 0;
    std::vector<double> in;       // 2C planes
    std::vector<double> embed;    // kEmbed
    std::vector<double> z1, a1;   // kHidden planes
    std::vector<double> z2, a2;   // kHidden planes
    std::vector<double> z3;       // C planes
};

void ConvAdjuster::layout() {
    int ic1 = 2 * channels_;
    std::size_t n = 0;
    off_w1_ = n; n += static_cast<std::size_t>(kHidden) * ic1 * 9;
    off_b1_ = n; n += kHidden;
    off_wt_ = n; n += static_cast<std::size_t>(kHidden) * kEmbed;
    off_bt_ = n; n += kHidden;
    off_w2_ = n; n += static_cast<std::size_t>(kHidden) * kHidden * 9;
    off_b2_ = n; n += kHidden;
    off_w3_ = n; n += static_cast<std::size_t>(channels_) * kHidden * 9;
    off_b3_ = n; n += channels_;
    params_.assign(n, 0.0);
}

ConvAdjuster::ConvAdjuster(int image_channels, std::uint64_t seed) : channels_(image_channels) {
    if (image_channels < 1)
        throw std::invalid_argument("ConvAdjuster: channels must be >= 1");
    layout();
    Rng rng(seed);
    int ic1 = 2 * channels_;
    double s1 = std::sqrt(2.0 / (ic1 * 9));
    for (std::size_t i = off_w1_; i < off_w1_ + static_cast<std::size_t>(kHidden) * ic1 * 9; ++i)
        params_[i] = s1 * rng.gaussian();
    double st = std::sqrt(1.0 / kEmbed);
    for (std::size_t i = off_wt_; i < off_wt_ + static_cast<std::size_t>(kHidden) * kEmbed; ++i)
        params_[i] = st * rng.gaussian();
    double s2 = std::sqrt(2.0 / (kHidden * 9));
    for (std::size_t i = off_w2_; i < off_w2_ + static_cast<std::size_t>(kHidden) * kHidden * 9; ++i)
        params_[i] = s2 * rng.gaussian();
    // final layer stays zero so the untrained adjuster is the zero map
}

Image ConvAdjuster::forward(const Image& y_acute, const Image& x_t0, int t, Cache* cache) const {
    require_same_shape(y_acute, x_t0, "ConvAdjuster::forward");
    if (y_acute.channels != channels_)
        throw std::invalid_argument("ConvAdjuster: channel count does not match net");
    int H = y_acute.height, W = y_acute.width, hw = H * W;
    int ic1 = 2 * channels_;

    Cache local;
    Cache& c = cache ? *cache : local;
    c.H = H;
    c.W = W;
    c.in.resize(static_cast<std::size_t>(ic1) * hw);
    for (int ch = 0; ch < channels_; ++ch)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                c.in[static_cast<std::size_t>(ch) * hw + y * W + x] = y_acute.at(y, x, ch);
                c.in[static_cast<std::size_t>(channels_ + ch) * hw + y * W + x] =
                    x_t0.at(y, x, ch);
            }

    c.embed.resize(kEmbed);
    time_embedding(t, c.embed.data());

    c.z1.resize(static_cast<std::size_t>(kHidden) * hw);
    conv3x3_fwd(c.in.data(), ic1, params_.data() + off_w1_, params_.data() + off_b1_,
                c.z1.data(), kHidden, H, W);
    for (int oc = 0; oc < kHidden; ++oc) {
        double te = params_[off_bt_ + oc];
        for (int e = 0; e < kEmbed; ++e)
            te += params_[off_wt_ + static_cast<std::size_t>(oc) * kEmbed + e] * c.embed[e];
        double* plane = c.z1.data() + static_cast<std::size_t>(oc) * hw;
        for (int i = 0; i < hw; ++i) plane[i] += te;
    }
    c.a1.resize(c.z1.size());
    for (std::size_t i = 0; i < c.z1.size(); ++i) c.a1[i] = elu(c.z1[i]);

    c.z2.resize(static_cast<std::size_t>(kHidden) * hw);
    conv3x3_fwd(c.a1.data(), kHidden, params_.data() + off_w2_, params_.data() + off_b2_,
                c.z2.data(), kHidden, H, W);
    c.a2.resize(c.z2.size());
    for (std::size_t i = 0; i < c.z2.size(); ++i) c.a2[i] = elu(c.z2[i]);

    c.z3.resize(static_cast<std::size_t>(channels_) * hw);
    conv3x3_fwd(c.a2.data(), kHidden, params_.data() + off_w3_, params_.data() + off_b3_,
                c.z3.data(), channels_, H, W);

    Image out(H, W, channels_);
    for (int ch = 0; ch < channels_; ++ch)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                double v = c.z3[static_cast<std::size_t>(ch) * hw + y * W + x];
                out.at(y, x, ch) = std::clamp(v, 0.0, 1.0);
            }
    return out;
}

Image ConvAdjuster::adjust(const Image& y_acute, const Image& x_t0, int t) const {
    return forward(y_acute, x_t0, t, nullptr);
}

void ConvAdjuster::backward(const Cache& c, const Image& d_map, Grads* grads) const {
    if (grads->g.size() != params_.size()) grads->g.assign(params_.size(), 0.0);
    int H = c.H, W = c.W, hw = H * W;
    int ic1 = 2 * channels_;

    // clamp: gradient passes inside [0,1] inclusive (zero-init nets start
    // exactly at the lower boundary)
    std::vector<double> dz3(static_cast<std::size_t>(channels_) * hw);
    for (int ch = 0; ch < channels_; ++ch)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                std::size_t i = static_cast<std::size_t>(ch) * hw + y * W + x;
                double z = c.z3[i];
                dz3[i] = (z >= 0.0 && z <= 1.0) ? d_map.at(y, x, ch) : 0.0;
            }

    conv3x3_bwd_weights(c.a2.data(), kHidden, dz3.data(), channels_,
                        grads->g.data() + off_w3_, grads->g.data() + off_b3_, H, W);
    std::vector<double> da2(static_cast<std::size_t>(kHidden) * hw);
    conv3x3_bwd_data(dz3.data(), channels_, params_.data() + off_w3_, da2.data(), kHidden, H, W);

    std::vector<double> dz2(da2.size());
    for (std::size_t i = 0; i < da2.size(); ++i) dz2[i] = da2[i] * elu_deriv(c.z2[i]);

    conv3x3_bwd_weights(c.a1.data(), kHidden, dz2.data(), kHidden,
                        grads->g.data() + off_w2_, grads->g.data() + off_b2_, H, W);
    std::vector<double> da1(static_cast<std::size_t>(kHidden) * hw);
    conv3x3_bwd_data(dz2.data(), kHidden, params_.data() + off_w2_, da1.data(), kHidden, H, W);

    std::vector<double> dz1(da1.size());
    for (std::size_t i = 0; i < da1.size(); ++i) dz1[i] = da1[i] * elu_deriv(c.z1[i]);

    conv3x3_bwd_weights(c.in.data(), ic1, dz1.data(), kHidden,
                        grads->g.data() + off_w1_, grads->g.data() + off_b1_, H, W);
    for (int oc = 0; oc < kHidden; ++oc) {
        double acc = 0.0;
        const double* plane = dz1.data() + static_cast<std::size_t>(oc) * hw;
        for (int i = 0; i < hw; ++i) acc += plane[i];
        grads->g[off_bt_ + oc] += acc;
        for (int e = 0; e < kEmbed; ++e)
            grads->g[off_wt_ + static_cast<std::size_t>(oc) * kEmbed + e] += acc * c.embed[e];
    }
}

void ConvAdjuster::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("ConvAdjuster::save: cannot open " + path);
    out << "dgsa1 " << channels_ << " " << params_.size() << "\n";
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(params_.size() * sizeof(double)));
    if (!out) throw std::runtime_error("ConvAdjuster::save: write failed for " + path);
}

ConvAdjuster ConvAdjuster::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ConvAdjuster::load: cannot open " + path);
    std::string tag;
    int channels;
    std::size_t n;
    if (!(in >> tag >> channels >> n) || tag != "dgsa1")
        throw std::runtime_error("ConvAdjuster::load: bad header in " + path);
    in.ignore(1);
    ConvAdjuster net(channels, 0);
    if (net.params_.size() != n)
        throw std::runtime_error("ConvAdjuster::load: parameter count mismatch in " + path);
    in.read(reinterpret_cast<char*>(net.params_.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("ConvAdjuster::load: truncated file " + path);
    return net;
}

// ------------------------------------------------------------- training ----

namespace {

struct StepSample {
    Image x0;
    Image y_acute;
    double std_hat = 0.0;
    int t = 0;
};

// one adjusted guided step from a clean image; returns the loss and, when
// grads is set, accumulates parameter gradients
double dgsa_step_loss(const ConvAdjuster& net, const StepSample& s, const Denoiser& den,
                      const DiffusionSchedule& sched, const GuidanceConfig& gcfg,
                      const std::array<double, 4>& gamma, Rng& rng,
                      ConvAdjuster::Grads* grads) {
    int t = s.t;
    Image eps_noise = rng.gaussian_image(s.x0.height, s.x0.width, s.x0.channels);
    Image x_t = q_sample(s.x0, t, eps_noise, sched);
    Image eps = den.eps(x_t, t);
    Image x_t0 = predict_x0(x_t, t, eps, sched);
    Image step_noise = rng.gaussian_image(s.x0.height, s.x0.width, s.x0.channels);
    Image x_prev_un = reverse_step_mean(x_t, t, eps, step_noise, sched);

    ConvAdjuster::Cache cache;
    Image a_map = net.forward(s.y_acute, x_t0, t, grads ? &cache : nullptr);
    Image guide = fidelity_gradient_core(x_t, t, x_t0, s.y_acute, s.std_hat, den, sched);

    Image x_prev = x_prev_un;
    for (std::size_t i = 0; i < x_prev.data.size(); ++i)
        x_prev.data[i] -= gcfg.s_base * a_map.data[i] * guide.data[i];

    int tp = t - 1;
    Image eps2 = den.eps(x_prev, tp);
    Image x_prev0 = predict_x0(x_prev, tp, eps2, sched);

    Image dxp;
    double loss = dgsa_loss_grad(x_prev0, s.x0, gamma, grads ? &dxp : nullptr);
    if (!grads) return loss;

    // back through predict_x0 at tp with the denoiser frozen-but-differentiable
    Image jv = den.vjp(x_prev, tp, dxp);
    double ab = sched.alpha_bar[tp];
    double sq_ab = std::sqrt(ab), sq_1m = std::sqrt(1.0 - ab);
    Image d_xprev(x_prev.height, x_prev.width, x_prev.channels);
    for (std::size_t i = 0; i < d_xprev.data.size(); ++i)
        d_xprev.data[i] = (dxp.data[i] - sq_1m * jv.data[i]) / sq_ab;

    Image d_map(x_prev.height, x_prev.width, x_prev.channels);
    for (std::size_t i = 0; i < d_map.data.size(); ++i)
        d_map.data[i] = -gcfg.s_base * d_xprev.data[i] * guide.data[i];

    net.backward(cache, d_map, grads);
    return loss;
}

StepSample draw_stage1_sample(const std::vector<Image>& corpus, const StartTable& table,
                              const DgsaTrainOptions& opt, Rng& rng) {
    StepSample s;
    s.x0 = corpus[static_cast<std::size_t>(rng.uniform_int(0, corpus.size() - 1))];
    s.std_hat = rng.uniform(opt.stage1_std_min, opt.stage1_std_max);
    s.y_acute = convolve(s.x0, make_kernel(s.std_hat));
    int t_start = std::max(1, lookup(table, s.std_hat).t_start);
    s.t = static_cast<int>(rng.uniform_int(1, t_start));
    return s;
}

StepSample draw_stage2_sample(const std::vector<Image>& corpus, const Restorer& restorer,
                              const StdEstimator& estimator, const StartTable& table,
                              const DgsaTrainOptions& opt, Rng& rng) {
    StepSample s;
    s.x0 = corpus[static_cast<std::size_t>(rng.uniform_int(0, corpus.size() - 1))];
    DegradationParams p;
    p.sigma = rng.uniform(opt.deg_sigma_min, opt.deg_sigma_max);
    p.scale = rng.uniform(opt.deg_scale_min, opt.deg_scale_max);
    p.noise = rng.uniform(opt.deg_noise_min, opt.deg_noise_max);
    p.quality = static_cast<int>(rng.uniform_int(opt.deg_quality_min, opt.deg_quality_max));
    Image y = degrade(s.x0, p, static_cast<std::uint64_t>(rng.uniform_int(0, 1 << 30)));
    StdEstimate est = estimator.estimate(y);
    s.std_hat = est.std_hat;
    s.y_acute = blur_level_map(y, restorer, est.std_hat);
    int t_start = std::max(1, lookup(table, s.std_hat).t_start);
    s.t = static_cast<int>(rng.uniform_int(1, t_start));
    return s;
}

}  // namespace

DgsaTrainResult train_dgsa(const std::vector<Image>& corpus, const Restorer& restorer,
                           const StdEstimator& estimator, const StartTable& table,
                           const Denoiser& den, const DiffusionSchedule& sched,
                           const GuidanceConfig& gcfg, const StdGrid& grid,
                           const DgsaTrainOptions& opt) {
    if (corpus.empty()) throw std::invalid_argument("train_dgsa: empty corpus");
    (void)grid;

    DgsaTrainResult result;
    result.net = std::make_unique<ConvAdjuster>(corpus.front().channels, opt.seed + 1);
    ConvAdjuster& net = *result.net;

    std::vector<double> velocity(net.params().size(), 0.0);
    std::vector<double> checkpoint = net.params();
    Rng rng(opt.seed);

    int total = opt.stage1_iters + opt.stage2_iters;
    for (int it = 0; it < total; ++it) {
        bool stage2 = it >= opt.stage1_iters;
        ConvAdjuster::Grads grads;
        grads.g.assign(net.params().size(), 0.0);
        double batch_loss = 0.0;
        for (int b = 0; b < opt.batch; ++b) {
            StepSample s = stage2
                               ? draw_stage2_sample(corpus, restorer, estimator, table, opt, rng)
                               : draw_stage1_sample(corpus, table, opt, rng);
            batch_loss += dgsa_step_loss(net, s, den, sched, gcfg, opt.gamma, rng, &grads);
        }
        batch_loss /= opt.batch;
        result.loss_curve.push_back(batch_loss);

        if (!std::isfinite(batch_loss)) {
            net.params() = checkpoint;
            result.aborted = true;
            return result;
        }

        double inv_b = 1.0 / opt.batch;
        for (std::size_t i = 0; i < net.params().size(); ++i) {
            velocity[i] = opt.momentum * velocity[i] - opt.lr * grads.g[i] * inv_b;
            net.params()[i] += velocity[i];
        }

        if ((it + 1) % opt.checkpoint_every == 0) checkpoint = net.params();
    }
    return result;
}

std::vector<DgsaProbe> make_dgsa_probes(const std::vector<Image>& corpus, int per_image,
                                        const StartTable& table, double std_min, double std_max,
                                        std::uint64_t seed) {
    if (corpus.empty()) throw std::invalid_argument("make_dgsa_probes: empty corpus");
    Rng rng(seed);
    std::vector<DgsaProbe> probes;
    for (const Image& x0 : corpus) {
        for (int k = 0; k < per_image; ++k) {
            DgsaProbe p;
            p.x0 = x0;
            p.std_hat = rng.uniform(std_min, std_max);
            p.y_acute = convolve(x0, make_kernel(p.std_hat));
            int t_start = std::max(1, lookup(table, p.std_hat).t_start);
            p.t = static_cast<int>(rng.uniform_int(1, t_start));
            p.noise_seed = static_cast<std::uint64_t>(rng.uniform_int(0, 1 << 30));
            probes.push_back(std::move(p));
        }
    }
    return probes;
}

double eval_adjuster_loss(const ScaleAdjuster& adjuster, const std::vector<DgsaProbe>& probes,
                          const Denoiser& den, const DiffusionSchedule& sched,
                          const GuidanceConfig& gcfg, const std::array<double, 4>& gamma) {
    if (probes.empty()) throw std::invalid_argument("eval_adjuster_loss: no probes");
    double total = 0.0;
    for (const DgsaProbe& p : probes) {
        Rng rng(p.noise_seed);
        Image eps_noise = rng.gaussian_image(p.x0.height, p.x0.width, p.x0.channels);
        Image x_t = q_sample(p.x0, p.t, eps_noise, sched);
        Image eps = den.eps(x_t, p.t);
        Image x_t0 = predict_x0(x_t, p.t, eps, sched);
        Image step_noise = rng.gaussian_image(p.x0.height, p.x0.width, p.x0.channels);
        Image x_prev = reverse_step_mean(x_t, p.t, eps, step_noise, sched);

        Image a_map = adjuster.adjust(p.y_acute, x_t0, p.t);
        Image guide = fidelity_gradient_core(x_t, p.t, x_t0, p.y_acute, p.std_hat, den, sched);
        for (std::size_t i = 0; i < x_prev.data.size(); ++i)
            x_prev.data[i] -= gcfg.s_base * a_map.data[i] * guide.data[i];

        Image eps2 = den.eps(x_prev, p.t - 1);
        Image x_prev0 = predict_x0(x_prev, p.t - 1, eps2, sched);
        total += dgsa_loss(x_prev0, p.x0, gamma);
    }
    return total / probes.size();
}

}  // namespace gdr
