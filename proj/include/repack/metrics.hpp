#pragma once

#include "repack/tensor.hpp"

namespace repack {

// 10*log10(peak^2 / MSE); +infinity for identical inputs.
double psnr(const FeatureTensor& ref, const FeatureTensor& rec, double peak = 1.0);

// Single-scale SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
// channel-averaged, mean over valid window positions. Inputs are rank-3
// (h,w,c) images with values in [0, peak].
double ssim(const FeatureTensor& ref, const FeatureTensor& rec, double peak = 1.0);

struct GaussianStats {
    Vector mean;
    Matrix covariance;  // symmetric, divisor M-1
    std::size_t count = 0;
};

GaussianStats gaussian_stats(const Matrix& rows);
GaussianStats gaussian_stats(const FeatureTensor& rows);

// ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa Sb)^{1/2}); the matrix square
// root comes from the eigendecomposition of Sa^{1/2} Sb Sa^{1/2} with
// eigenvalues below 1e-10 clamped. Result clamped at 0.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

}  // namespace repack
