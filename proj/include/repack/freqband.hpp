#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "repack/tensor.hpp"

namespace repack {

using ComplexGrid = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

// Unnormalized forward 2D transform; the inverse scales by 1/(h*w).
// Radix-2 along power-of-two axes, direct DFT otherwise (latents are small).
ComplexGrid fft2(const ComplexGrid& grid);
ComplexGrid fft2(const Matrix& grid);
ComplexGrid ifft2(const ComplexGrid& grid);

// Binary radial mask over centered signed frequency indices. rho is scaled
// per axis by the half-extent and by 1/sqrt(2) so the farthest corner sits
// at rho = 1; the DC bin has rho = 0 and is always passed.
struct FrequencyMask {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    double radius = 0.0;
    Eigen::ArrayXXd mask;  // h x w of {0,1}

    std::size_t passed_count() const { return static_cast<std::size_t>(mask.sum() + 0.5); }
};

FrequencyMask radial_mask(std::uint32_t h, std::uint32_t w, double r);

// Complementary low/high split of a rank-3 (h,w,c) latent, per channel.
// z_low + z_high reconstructs the input; energies are squared Frobenius
// norms, so energy_low + energy_high matches the total by Parseval.
struct BandSplit {
    FeatureTensor z_low;
    FeatureTensor z_high;
    double energy_low = 0.0;
    double energy_high = 0.0;
};

BandSplit band_split(const FeatureTensor& latent, double r);

// Cumulative low-band energy fraction per radius; non-decreasing since
// the masks are nested.
std::vector<std::pair<double, double>> band_energy_profile(const FeatureTensor& latent,
                                                           const std::vector<double>& radii);

}  // namespace repack
