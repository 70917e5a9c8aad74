#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gdr/adjuster.hpp"
#include "gdr/denoiser.hpp"
#include "gdr/image.hpp"
#include "gdr/restorer.hpp"
#include "gdr/sampler.hpp"
#include "gdr/schedule.hpp"
#include "gdr/spectrum.hpp"
#include "gdr/start_table.hpp"
#include "gdr/swt.hpp"

namespace gdr {

// Wavelet-band L1 plus a gradient-magnitude structural dissimilarity proxy:
//   sum_i gamma_i * mean|SWT(pred)_i - SWT(target)_i| + gms(pred, target)
// gamma order is LL, LH, HL, HH.
double dgsa_loss(const Image& pred, const Image& target, const std::array<double, 4>& gamma);
// Same value plus d loss / d pred.
double dgsa_loss_grad(const Image& pred, const Image& target, const std::array<double, 4>& gamma,
                      Image* grad);

// Gradient-magnitude structural dissimilarity in [0,1]; 0 iff equal gradients.
double gms_distance(const Image& a, const Image& b);

inline constexpr std::array<double, 4> kDefaultSwtGamma = {0.00, 0.01, 0.01, 0.05};

// Three 3x3 convolution layers (2C -> 64 -> 64 -> C), ELU after the first
// two, final activation clamped to [0,1]. Input is the channel concatenation
// of the guidance image and the current clean prediction; a projected
// sinusoidal embedding of t is added to the first-layer features. The final
// layer starts zero-initialized so the untrained map is identically 0.
class ConvAdjuster final : public ScaleAdjuster {
public:
    static constexpr int kHidden = 64;

    ConvAdjuster(int image_channels, std::uint64_t seed);

    Image adjust(const Image& y_acute, const Image& x_t0, int t) const override;

    void save(const std::string& path) const;
    static ConvAdjuster load(const std::string& path);

    int image_channels() const { return channels_; }

    struct Cache;
    Image forward(const Image& y_acute, const Image& x_t0, int t, Cache* cache) const;

    struct Grads;
    void backward(const Cache& cache, const Image& d_map, Grads* grads) const;

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

private:
    int channels_ = 1;
    std::vector<double> params_;

    // parameter block offsets
    std::size_t off_w1_, off_b1_, off_wt_, off_bt_, off_w2_, off_b2_, off_w3_, off_b3_;
    void layout();
};

struct ConvAdjuster::Grads {
    std::vector<double> g;  // same layout as params
};

struct DgsaTrainOptions {
    int stage1_iters = 2000;
    int stage2_iters = 700;  // paper-ratio 20:7 at desk scale
    int batch = 8;
    double lr = 1e-3;
    double momentum = 0.9;
    std::array<double, 4> gamma = kDefaultSwtGamma;
    // stage 1 samples exact gaussian blur in this std range
    double stage1_std_min = 0.5;
    double stage1_std_max = 8.0;
    // stage 2 samples the synthetic degradation pipeline in these sub-ranges
    double deg_sigma_min = 0.5, deg_sigma_max = 6.0;
    double deg_scale_min = 1.0, deg_scale_max = 2.5;
    double deg_noise_min = 0.0, deg_noise_max = 8.0;
    int deg_quality_min = 60, deg_quality_max = 100;
    std::uint64_t seed = 0;
    int checkpoint_every = 50;
};

struct DgsaTrainResult {
    std::unique_ptr<ConvAdjuster> net;
    std::vector<double> loss_curve;  // mean batch loss per iteration
    bool aborted = false;            // loss went non-finite; net is the last checkpoint
};

// Two-stage training: exact gaussian-blurred measurements first, then
// fine-tuning on mapped outputs of the frozen restorer/estimator. Each
// iteration takes one adjusted guided step at a random t below the start
// step and minimizes dgsa_loss of the next clean prediction against the
// true image, backpropagating through the step with the denoiser frozen.
DgsaTrainResult train_dgsa(const std::vector<Image>& corpus, const Restorer& restorer,
                           const StdEstimator& estimator, const StartTable& table,
                           const Denoiser& den, const DiffusionSchedule& sched,
                           const GuidanceConfig& gcfg, const StdGrid& grid,
                           const DgsaTrainOptions& opt);

// Fixed evaluation probes: one adjusted step at (x0, y_acute, t) with pinned
// noise seeds, scoring dgsa_loss of the next clean prediction. Deterministic,
// so adjusters can be compared on equal terms.
struct DgsaProbe {
    Image x0;
    Image y_acute;
    double std_hat = 0.0;
    int t = 0;
    std::uint64_t noise_seed = 0;
};

std::vector<DgsaProbe> make_dgsa_probes(const std::vector<Image>& corpus, int per_image,
                                        const StartTable& table, double std_min, double std_max,
                                        std::uint64_t seed);

double eval_adjuster_loss(const ScaleAdjuster& adjuster, const std::vector<DgsaProbe>& probes,
                          const Denoiser& den, const DiffusionSchedule& sched,
                          const GuidanceConfig& gcfg, const std::array<double, 4>& gamma);

}  // namespace gdr
