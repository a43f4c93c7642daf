#include "repack/freqband.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace repack {

namespace {

using Complex = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, unnormalized.
void fft_radix2(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Direct O(n^2) transform for non-power-of-two lengths.
void dft_direct(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    std::vector<Complex> out(n, Complex(0.0, 0.0));
    const double sign = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * std::numbers::pi * static_cast<double>(k * j) /
                               static_cast<double>(n);
            out[k] += a[j] * Complex(std::cos(ang), std::sin(ang));
        }
    }
    a = std::move(out);
}

void transform_1d(std::vector<Complex>& a, bool inverse) {
    if (a.size() <= 1) return;
    if (is_pow2(a.size()))
        fft_radix2(a, inverse);
    else
        dft_direct(a, inverse);
}

// Rows then columns; unnormalized in both directions.
ComplexGrid transform_2d(const ComplexGrid& grid, bool inverse) {
    const Eigen::Index h = grid.rows(), w = grid.cols();
    ComplexGrid out = grid;
    std::vector<Complex> line;
    line.resize(static_cast<std::size_t>(w));
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index j = 0; j < w; ++j) line[static_cast<std::size_t>(j)] = out(i, j);
        transform_1d(line, inverse);
        for (Eigen::Index j = 0; j < w; ++j) out(i, j) = line[static_cast<std::size_t>(j)];
    }
    line.resize(static_cast<std::size_t>(h));
    for (Eigen::Index j = 0; j < w; ++j) {
        for (Eigen::Index i = 0; i < h; ++i) line[static_cast<std::size_t>(i)] = out(i, j);
        transform_1d(line, inverse);
        for (Eigen::Index i = 0; i < h; ++i) out(i, j) = line[static_cast<std::size_t>(i)];
    }
    return out;
}

// Signed centered frequency index: fx in [-ceil(n/2)+1, floor(n/2)].
double signed_freq(std::uint32_t i, std::uint32_t n) {
    return 2 * i <= n ? static_cast<double>(i)
                      : static_cast<double>(i) - static_cast<double>(n);
}

ComplexGrid channel_grid(const FeatureTensor& latent, std::uint32_t ch) {
    const std::uint32_t h = latent.dims[0], w = latent.dims[1], c = latent.dims[2];
    ComplexGrid grid(h, w);
    for (std::uint32_t i = 0; i < h; ++i)
        for (std::uint32_t j = 0; j < w; ++j)
            grid(i, j) = Complex(latent.data[(std::size_t(i) * w + j) * c + ch], 0.0);
    return grid;
}

void require_rank3(const FeatureTensor& latent) {
    if (latent.rank() != 3)
        throw ShapeError("expected rank-3 (h,w,c) latent, got rank " +
                         std::to_string(latent.rank()));
}

}  // namespace

ComplexGrid fft2(const ComplexGrid& grid) { return transform_2d(grid, false); }

ComplexGrid fft2(const Matrix& grid) {
    return transform_2d(grid.cast<Complex>(), false);
}

ComplexGrid ifft2(const ComplexGrid& grid) {
    ComplexGrid out = transform_2d(grid, true);
    out /= static_cast<double>(grid.rows()) * static_cast<double>(grid.cols());
    return out;
}

FrequencyMask radial_mask(std::uint32_t h, std::uint32_t w, double r) {
    if (h == 0 || w == 0) throw ValidationError("mask dimensions must be positive");
    if (r < 0.0 || r > 1.0)
        throw RangeError("mask radius must lie in [0,1], got " + std::to_string(r));
    FrequencyMask m;
    m.height = h;
    m.width = w;
    m.radius = r;
    m.mask.resize(h, w);
    const double half_h = h / 2.0, half_w = w / 2.0;
    const double root2 = std::sqrt(2.0);
    for (std::uint32_t i = 0; i < h; ++i) {
        for (std::uint32_t j = 0; j < w; ++j) {
            const double tx = h > 1 ? signed_freq(i, h) / half_h : 0.0;
            const double ty = w > 1 ? signed_freq(j, w) / half_w : 0.0;
            const double rho = std::sqrt(tx * tx + ty * ty) / root2;
            m.mask(i, j) = rho <= r ? 1.0 : 0.0;
        }
    }
    return m;
}

BandSplit band_split(const FeatureTensor& latent, double r) {
    require_rank3(latent);
    validate_tensor(latent);
    const std::uint32_t h = latent.dims[0], w = latent.dims[1], c = latent.dims[2];
    const FrequencyMask mask = radial_mask(h, w, r);

    BandSplit split;
    split.z_low.dims = split.z_high.dims = latent.dims;
    split.z_low.data.resize(latent.data.size());
    split.z_high.data.resize(latent.data.size());

    for (std::uint32_t ch = 0; ch < c; ++ch) {
        const ComplexGrid freq = fft2(channel_grid(latent, ch));
        ComplexGrid low_f = freq, high_f = freq;
        for (std::uint32_t i = 0; i < h; ++i)
            for (std::uint32_t j = 0; j < w; ++j) {
                low_f(i, j) *= mask.mask(i, j);
                high_f(i, j) *= 1.0 - mask.mask(i, j);
            }
        // conjugate-symmetric mask keeps the bands real for real input;
        // the residue (<= 1e-6) is discarded
        const ComplexGrid low = ifft2(low_f);
        const ComplexGrid high = ifft2(high_f);
        for (std::uint32_t i = 0; i < h; ++i)
            for (std::uint32_t j = 0; j < w; ++j) {
                const std::size_t idx = (std::size_t(i) * w + j) * c + ch;
                const double lv = low(i, j).real();
                const double hv = high(i, j).real();
                split.z_low.data[idx] = static_cast<float>(lv);
                split.z_high.data[idx] = static_cast<float>(hv);
                split.energy_low += lv * lv;
                split.energy_high += hv * hv;
            }
    }
    return split;
}

std::vector<std::pair<double, double>> band_energy_profile(const FeatureTensor& latent,
                                                           const std::vector<double>& radii) {
    require_rank3(latent);
    validate_tensor(latent);
    if (radii.empty()) throw ValidationError("radii list is empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 0.0 || radii[i] > 1.0)
            throw ValidationError("radii must lie in [0,1]");
        if (i > 0 && radii[i] < radii[i - 1])
            throw ValidationError("radii must be sorted ascending");
    }
    const std::uint32_t h = latent.dims[0], w = latent.dims[1], c = latent.dims[2];

    // Parseval: low-band energy per radius from the spectrum directly.
    Eigen::ArrayXXd power = Eigen::ArrayXXd::Zero(h, w);
    for (std::uint32_t ch = 0; ch < c; ++ch)
        power += fft2(channel_grid(latent, ch)).array().abs2();
    power /= static_cast<double>(h) * static_cast<double>(w);
    const double total = power.sum();

    std::vector<std::pair<double, double>> profile;
    profile.reserve(radii.size());
    for (double r : radii) {
        const FrequencyMask mask = radial_mask(h, w, r);
        const double low = (power * mask.mask).sum();
        profile.emplace_back(r, total > 0.0 ? low / total : 1.0);
    }
    return profile;
}

}  // namespace repack
