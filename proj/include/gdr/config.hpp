#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdr/gaussian.hpp"

namespace gdr {

// Flat "key = value" configuration, '#' comments. Unknown keys are rejected
// and every value is range-checked at load.
struct RunConfig {
    // schedule
    int T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    // std grid
    double std_min = 0.1;
    double std_max = 15.0;
    double std_step = 0.1;
    // start-table tolerance and std* search tolerance
    double tol = 1e-3;
    double xi = 0.01;
    // guidance
    int n_guidance = 3;
    std::vector<double> lambda;       // empty: defaults for n_guidance
    std::vector<double> std_offsets;  // empty: 0,1,2,...
    double s_base = 1.0;
    bool refine_std = true;
    double std_lr = 0.05;
    double std_max_step = 0.05;
    bool use_start_table = true;
    // components
    std::string restorer = "wiener";    // wiener | identity
    std::string estimator = "spectral"; // spectral | trained
    std::string adjuster = "constant";  // constant | variance | conv
    double adjuster_scale = 1.0;
    int adjuster_window = 7;
    double adjuster_pivot = 0.01;
    std::string denoiser = "gmm";
    int prior_components = 12;
    double noise_power = 1e-3;
    // corpus / toy data
    int image_size = 32;
    int channels = 1;
    int corpus_n = 96;
    std::uint64_t corpus_seed = 1;
    std::uint64_t seed = 0;
    // degradation defaults for synthetic experiments
    double deg_sigma = 3.0;
    double deg_scale = 2.0;
    double deg_noise = 5.0;
    int deg_quality = 80;
    // training
    int dgsa_stage1_iters = 2000;
    int dgsa_stage2_iters = 700;
    int dgsa_batch = 8;
    double dgsa_lr = 1e-3;
    double dgsa_momentum = 0.9;
    int sde_iters = 3000;
    // artifact paths
    std::string dsst_path;
    std::string prior_path;
    std::string spectrum_path;
    std::string adjuster_path;
    std::string sde_path;
    std::string trace_path;

    StdGrid grid() const { return {std_min, std_max, std_step}; }

    static RunConfig load(const std::string& path);
    static RunConfig parse(const std::string& text);
    void validate() const;
    std::string serialize() const;
};

}  // namespace gdr
