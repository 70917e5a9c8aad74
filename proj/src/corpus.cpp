#include "gdr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "gdr/gaussian.hpp"
#include "gdr/io.hpp"
#include "gdr/rng.hpp"

namespace gdr {

namespace {

struct Ellipse {
    double cx, cy, rx, ry, sharp;
};

double ellipse_soft(const Ellipse& e, double x, double y) {
    double dx = (x - e.cx) / e.rx;
    double dy = (y - e.cy) / e.ry;
    double d = dx * dx + dy * dy - 1.0;
    return 1.0 / (1.0 + std::exp(e.sharp * d));
}

// Texture fields are locked to the pixel grid (identical across the corpus)
// so that blur destroys information a corpus prior can restore.
double band_fine(int x, int /*y*/) {
    return std::sin(2.0 * M_PI * x / 3.0 + 0.8) >= 0.0 ? 1.0 : -1.0;
}

double band_coarse(int x, int y) {
    return std::sin(2.0 * M_PI * (x + y) / 11.0 + 0.4) >= 0.0 ? 1.0 : -1.0;
}

}  // namespace

std::vector<Image> synth_corpus(int n, int size, std::uint64_t seed, int channels) {
    if (n < 1) throw std::invalid_argument("synth_corpus: n must be >= 1");
    if (size != 16 && size != 32 && size != 64)
        throw std::invalid_argument("synth_corpus: size must be 16, 32 or 64");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("synth_corpus: channels must be 1 or 3");

    std::vector<Image> out;
    out.reserve(n);
    Rng rng(seed);
    for (int img_i = 0; img_i < n; ++img_i) {
        // low-frequency shading
        double fx = rng.uniform(0.5, 1.5), fy = rng.uniform(0.5, 1.5);
        double phase = rng.uniform(0.0, 6.283185307179586);

        // brightness ellipses
        int n_bump = static_cast<int>(rng.uniform_int(2, 4));
        std::vector<Ellipse> bumps(n_bump);
        std::vector<double> bump_sign(n_bump);
        for (int k = 0; k < n_bump; ++k) {
            bumps[k] = {rng.uniform(0.2, 0.8) * size, rng.uniform(0.2, 0.8) * size,
                        rng.uniform(0.15, 0.4) * size, rng.uniform(0.15, 0.4) * size,
                        rng.uniform(4.0, 8.0)};
            bump_sign[k] = rng.uniform() < 0.5 ? -1.0 : 1.0;
        }

        // texture coverage masks: fine bands over most of the frame,
        // coarse bands in one or two patches
        int n_fine = 3;
        std::vector<Ellipse> fine(n_fine);
        for (int k = 0; k < n_fine; ++k)
            fine[k] = {rng.uniform(0.15, 0.85) * size, rng.uniform(0.15, 0.85) * size,
                       rng.uniform(0.3, 0.55) * size, rng.uniform(0.3, 0.55) * size,
                       rng.uniform(5.0, 9.0)};
        int n_coarse = static_cast<int>(rng.uniform_int(1, 2));
        std::vector<Ellipse> coarse(n_coarse);
        for (int k = 0; k < n_coarse; ++k)
            coarse[k] = {rng.uniform(0.2, 0.8) * size, rng.uniform(0.2, 0.8) * size,
                         rng.uniform(0.25, 0.45) * size, rng.uniform(0.25, 0.45) * size,
                         rng.uniform(5.0, 9.0)};

        Image img(size, size, channels);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double s = 0.8 * std::sin(2.0 * M_PI * (fx * x + fy * y) / size + phase);
                for (int k = 0; k < n_bump; ++k)
                    s += bump_sign[k] * 1.2 * ellipse_soft(bumps[k], x, y);
                double canvas = 0.5 + 0.1 * std::tanh(s);

                double m1 = 0.0;
                for (const Ellipse& e : fine) m1 = std::max(m1, ellipse_soft(e, x, y));
                double m2 = 0.0;
                for (const Ellipse& e : coarse) m2 = std::max(m2, ellipse_soft(e, x, y));

                double tex = 0.95 * m1 * band_fine(x, y) +
                             0.55 * m2 * (1.0 - m1) * band_coarse(x, y);
                double amp = std::min(canvas, 1.0 - canvas) - 0.01;
                double v = canvas + tex * amp;
                for (int c = 0; c < channels; ++c) img.at(y, x, c) = v;
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<Image> load_corpus_dir(const std::string& dir, int size, int channels) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw std::runtime_error("load_corpus_dir: not a directory: " + dir);

    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw std::runtime_error("load_corpus_dir: no .png files in " + dir);

    std::vector<Image> out;
    std::string failures;
    for (const std::string& p : paths) {
        try {
            Image img = read_png(p);
            int crop = std::min(img.height, img.width);
            int oy = (img.height - crop) / 2, ox = (img.width - crop) / 2;
            Image sq(crop, crop, img.channels);
            for (int y = 0; y < crop; ++y)
                for (int x = 0; x < crop; ++x)
                    for (int c = 0; c < img.channels; ++c)
                        sq.at(y, x, c) = img.at(oy + y, ox + x, c);
            Image rs = resize_bilinear(sq, size, size);
            Image conv(size, size, channels);
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x) {
                    if (channels == rs.channels) {
                        for (int c = 0; c < channels; ++c) conv.at(y, x, c) = rs.at(y, x, c);
                    } else if (channels == 1) {
                        double s = 0.0;
                        for (int c = 0; c < rs.channels; ++c) s += rs.at(y, x, c);
                        conv.at(y, x, 0) = s / rs.channels;
                    } else {
                        for (int c = 0; c < channels; ++c) conv.at(y, x, c) = rs.at(y, x, 0);
                    }
                }
            out.push_back(std::move(conv));
        } catch (const std::exception& e) {
            failures += std::string("\n  ") + p + ": " + e.what();
        }
    }
    if (!failures.empty())
        throw std::runtime_error("load_corpus_dir: unreadable files:" + failures);
    return out;
}

GmmPrior build_gmm_prior(const std::vector<Image>& corpus, int max_components,
                         std::uint64_t seed) {
    if (corpus.empty()) throw std::invalid_argument("build_gmm_prior: empty corpus");
    if (max_components < 1)
        throw std::invalid_argument("build_gmm_prior: max_components must be >= 1");
    int k = std::min<int>(max_components, static_cast<int>(corpus.size()));

    // deterministic k-means over flattened images
    Rng rng(seed);
    std::vector<Image> centers;
    centers.reserve(k);
    for (int j = 0; j < k; ++j) centers.push_back(corpus[j]);

    std::vector<int> assign(corpus.size(), 0);
    for (int iter = 0; iter < 10; ++iter) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            double best = 1e300;
            for (int j = 0; j < k; ++j) {
                double d = mean_sq_diff(corpus[i], centers[j]);
                if (d < best) {
                    best = d;
                    assign[i] = j;
                }
            }
        }
        for (int j = 0; j < k; ++j) {
            Image acc(centers[j].height, centers[j].width, centers[j].channels);
            int count = 0;
            for (std::size_t i = 0; i < corpus.size(); ++i) {
                if (assign[i] != j) continue;
                for (std::size_t p = 0; p < acc.data.size(); ++p)
                    acc.data[p] += corpus[i].data[p];
                ++count;
            }
            if (count == 0) continue;  // keep previous center
            for (double& v : acc.data) v /= count;
            centers[j] = std::move(acc);
        }
    }

    GmmPrior prior;
    std::vector<int> counts(k, 0);
    for (int a : assign) ++counts[a];
    double wsum = 0.0;
    for (int j = 0; j < k; ++j) {
        if (counts[j] == 0) continue;
        GmmComponent comp;
        comp.mean = centers[j];
        double var = 0.0;
        for (std::size_t i = 0; i < corpus.size(); ++i)
            if (assign[i] == j) var += mean_sq_diff(corpus[i], centers[j]);
        var /= counts[j];
        comp.var = std::max(var, 2e-3);
        comp.weight = static_cast<double>(counts[j]);
        wsum += comp.weight;
        prior.components.push_back(std::move(comp));
    }
    for (auto& c : prior.components) c.weight /= wsum;
    prior.validate();
    return prior;
}

}  // namespace gdr
