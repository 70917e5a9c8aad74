#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdr/denoiser.hpp"
#include "gdr/image.hpp"

namespace gdr {

// Procedural toy images: layered soft ellipses and low-frequency shading
// carrying grid-locked fine texture bands, so that blurring measurably
// destroys structure that a corpus prior can put back. Deterministic per
// seed. size must be 16, 32 or 64.
std::vector<Image> synth_corpus(int n, int size, std::uint64_t seed, int channels = 1);

// Ingest a directory of PNGs: center-crop to square, bilinear-resize to
// size, convert to the requested channel count. Throws listing unreadable
// files.
std::vector<Image> load_corpus_dir(const std::string& dir, int size, int channels = 1);

// Mixture prior over the corpus: k-means cluster means as components,
// per-component isotropic variance from within-cluster residuals.
GmmPrior build_gmm_prior(const std::vector<Image>& corpus, int max_components,
                         std::uint64_t seed);

}  // namespace gdr
