#pragma once

#include <cstdint>
#include <vector>

#include "repack/tensor.hpp"

namespace repack {

// Image/token geometry for the element-count bookkeeping.
struct DatasetSpec {
    std::uint32_t image_height = 0;
    std::uint32_t image_width = 0;
    std::uint32_t patch_size = 0;
    std::uint32_t embed_dim = 0;
    std::uint64_t sample_count = 1;
};

struct ParityResult {
    std::uint64_t feature_elements = 0;
    std::uint64_t pixel_elements = 0;
    double ratio = 0.0;
};

// Per-image element counts of the token feature map vs the RGB pixel grid.
// ratio == embed_dim / (patch_size^2 * 3) for every valid spec.
ParityResult element_count_parity(const DatasetSpec& spec);

// Ground-truth-manifold stand-in for a frozen encoder: rows concentrate
// within an epsilon-ball of a d_star-dimensional linear subspace.
struct SyntheticSpec {
    std::uint32_t embed_dim = 64;      // D
    std::uint32_t intrinsic_dim = 8;   // d_star
    double noise_radius = 0.1;         // epsilon
    std::uint32_t cluster_count = 4;   // K
    std::uint64_t seed = 0;
};

struct SyntheticData {
    FeatureTensor features;   // M x D rows
    FeatureTensor basis;      // D x d_star, orthonormal columns
    std::vector<int> labels;  // mixture component per row
};

// Deterministic given (spec, n_rows). Core coordinates come from a
// K-component unit-covariance Gaussian mixture with means kept at pairwise
// distance >= 4; residual noise is drawn isotropically and hard-projected
// onto the epsilon-ball.
SyntheticData gen_synthetic_features(const SyntheticSpec& spec, std::size_t n_rows);

}  // namespace repack
