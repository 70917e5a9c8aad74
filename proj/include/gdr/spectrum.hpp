#pragma once

#include <string>
#include <vector>

#include "gdr/gaussian.hpp"
#include "gdr/image.hpp"
#include "gdr/restorer.hpp"

namespace gdr {

// Radially averaged log power spectrum. Bin b covers radial frequency
// [b, b+1) * 0.5/bins in cycles per pixel.
struct RadialSpectrum {
    std::vector<double> log_power;

    int bins() const { return static_cast<int>(log_power.size()); }
    double bin_frequency(int b) const { return (b + 0.5) * 0.5 / bins(); }

    // "frequency_bin<TAB>log_power" per line
    void save(const std::string& path) const;
    static RadialSpectrum load(const std::string& path);
};

// Spectrum of one image (power averaged radially, then log).
RadialSpectrum radial_log_spectrum(const Image& img);
// Power averaged over the corpus first, then log: the clean-image reference.
RadialSpectrum corpus_reference_spectrum(const std::vector<Image>& corpus);

struct StdEstimate {
    double std_hat = 0.0;
    Image intermediate;  // restorer output (or input) blurred at std_hat
    bool degenerate = false;
};

enum class EstimationErrorCode { degenerate_spectrum };

class EstimationError : public std::runtime_error {
public:
    EstimationError(EstimationErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    EstimationErrorCode code() const { return code_; }

private:
    EstimationErrorCode code_;
};

// Blur-std estimator interface (spectral fit by default, trained variant
// optional). Immutable after construction.
struct StdEstimator {
    virtual StdEstimate estimate(const Image& y) const = 0;
    virtual ~StdEstimator() = default;
};

// Fits the Gaussian modulation-transfer attenuation between the input's
// radial spectrum and a clean-corpus reference, with a free log-power offset
// per image. Returns the grid std with the best fit. When a restorer is
// supplied the intermediate is the restorer output blurred at std_hat,
// otherwise the input blurred at std_hat.
class SpectralStdEstimator final : public StdEstimator {
public:
    SpectralStdEstimator(RadialSpectrum reference, StdGrid grid,
                         const Restorer* restorer = nullptr);
    StdEstimate estimate(const Image& y) const override;

    const RadialSpectrum& reference() const { return ref_; }

private:
    RadialSpectrum ref_;
    StdGrid grid_;
    const Restorer* restorer_;
};

// Small trained regressor from radial-spectrum features to std
// (one hidden layer, SGD with momentum). Optional alternative to the
// spectral fit.
class TrainedStdEstimator final : public StdEstimator {
public:
    StdEstimate estimate(const Image& y) const override;

    void save(const std::string& path) const;
    static TrainedStdEstimator load(const std::string& path);

    friend TrainedStdEstimator train_sde(const std::vector<Image>& corpus, const StdGrid& grid,
                                         int iterations, std::uint64_t seed);

private:
    RadialSpectrum ref_;
    StdGrid grid_;
    int hidden_ = 0;
    std::vector<double> w1_, b1_, w2_;  // features->hidden, hidden biases, hidden->1
    double b2_ = 0.0;

    std::vector<double> features(const Image& y) const;
    double predict(const std::vector<double>& f) const;
};

// Trains on exact gaussian-blurred corpus images with stds sampled from the
// grid range. Throws on an empty corpus.
TrainedStdEstimator train_sde(const std::vector<Image>& corpus, const StdGrid& grid,
                              int iterations, std::uint64_t seed);

}  // namespace gdr
