#pragma once

#include <string>
#include <vector>

#include "repack/pack.hpp"
#include "repack/spectrum.hpp"
#include "repack/toydiff.hpp"

namespace repack {

// Flat key=value configuration for the end-to-end run; '#' starts a comment.
struct PipelineConfig {
    std::uint32_t dim = 64;
    std::uint32_t intrinsic = 8;
    std::uint32_t clusters = 4;
    double noise = 0.1;
    std::size_t rows = 4096;
    std::uint64_t seed = 7;

    Eigen::Index pack_d = 8;
    std::size_t pack_epochs = 400;
    std::size_t pack_batch = 1 << 20;  // full batch by default
    double pack_lr = 0.3;
    Objective pack_objective = Objective::kL2;

    double freq_radius = 0.25;

    std::size_t diffuse_budget = 1200;
    std::size_t diffuse_checkpoint = 300;
    std::size_t diffuse_batch = 128;
    double diffuse_lr = 0.02;
    std::size_t diffuse_seeds = 3;
    std::size_t diffuse_eval = 512;
    std::size_t diffusion_steps = 100;
    unsigned threads = 1;
};

PipelineConfig parse_pipeline_config(const std::string& path);

struct PipelineResult {
    std::vector<std::string> written;  // data files, for manifest wrapping
    std::vector<std::string> summary;  // assertion lines as written to summary.txt
    bool all_pass = false;
};

// gen -> spectrum(raw) -> pack fit/apply -> spectrum(packed) -> frequency
// profiles -> diffusion comparison -> metrics, all under out_dir. The
// summary asserts elbow recovery, the PCA optimality gap, packed spectral
// flatness, and the convergence ordering.
PipelineResult end_to_end_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

// CSV with commented header lines "# elbow=.." / "# effective_rank=.."
// followed by index,eigenvalue,explained_ratio,cumulative_ratio rows.
void write_spectrum_csv(const PcaResult& pca, const std::string& path);

}  // namespace repack
