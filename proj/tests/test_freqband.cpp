#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "repack/freqband.hpp"

using namespace repack;

namespace {

FeatureTensor random_latent(std::mt19937_64& rng, std::uint32_t h, std::uint32_t w,
                            std::uint32_t c) {
    std::normal_distribution<float> n(0.0f, 1.0f);
    FeatureTensor t;
    t.dims = {h, w, c};
    t.data.resize(std::size_t(h) * w * c);
    for (auto& v : t.data) v = n(rng);
    return t;
}

double tensor_energy(const FeatureTensor& t) {
    double acc = 0.0;
    for (float v : t.data) acc += double(v) * double(v);
    return acc;
}

}  // namespace

TEST_CASE("fft2 closed forms: constant and impulse") {
    ComplexGrid constant = ComplexGrid::Constant(4, 8, std::complex<double>(2.5, 0.0));
    const ComplexGrid f = fft2(constant);
    CHECK(std::abs(f(0, 0) - std::complex<double>(2.5 * 32, 0.0)) <= 1e-9);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 8; ++j)
            if (i || j) CHECK(std::abs(f(i, j)) <= 1e-9);

    ComplexGrid impulse = ComplexGrid::Zero(8, 8);
    impulse(0, 0) = 1.0;
    const ComplexGrid fi = fft2(impulse);
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j)
            CHECK(std::abs(fi(i, j) - std::complex<double>(1.0, 0.0)) <= 1e-12);
}

TEST_CASE("fft2 matches the direct dft, including non-power-of-two sizes") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto [h, w] : {std::pair<int, int>{8, 8}, {6, 10}, {5, 8}, {7, 7}}) {
        ComplexGrid x(h, w);
        for (Eigen::Index i = 0; i < h; ++i)
            for (Eigen::Index j = 0; j < w; ++j) x(i, j) = {n(rng), n(rng)};
        const ComplexGrid mine = fft2(x);
        const ComplexGrid ref = oracles::naive_dft2(x);
        CHECK((mine - ref).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((ifft2(mine) - x).cwiseAbs().maxCoeff() <= 1e-6 * x.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("radial mask endpoints and brute-force bin count") {
    const FrequencyMask dc_only = radial_mask(16, 16, 0.0);
    CHECK(dc_only.passed_count() == 1);
    CHECK(dc_only.mask(0, 0) == 1.0);

    const FrequencyMask all = radial_mask(16, 16, 1.0);
    CHECK(all.passed_count() == 256);

    // independent enumeration over all bins at r = 0.5
    const FrequencyMask half = radial_mask(16, 16, 0.5);
    std::size_t expected = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            const double fx = (2 * i <= 16) ? i : i - 16;
            const double fy = (2 * j <= 16) ? j : j - 16;
            const double rho =
                std::sqrt((fx / 8.0) * (fx / 8.0) + (fy / 8.0) * (fy / 8.0)) / std::sqrt(2.0);
            if (rho <= 0.5) ++expected;
            CHECK(half.mask(i, j) == ((rho <= 0.5) ? 1.0 : 0.0));
        }
    CHECK(half.passed_count() == expected);

    CHECK_THROWS_AS(radial_mask(16, 16, -0.1), RangeError);
    CHECK_THROWS_AS(radial_mask(16, 16, 1.1), RangeError);
}

TEST_CASE("radial mask is symmetric under the conjugate index map") {
    for (auto [h, w] : {std::pair<std::uint32_t, std::uint32_t>{16, 16}, {12, 10}, {9, 16}}) {
        const FrequencyMask m = radial_mask(h, w, 0.4);
        for (std::uint32_t i = 0; i < h; ++i)
            for (std::uint32_t j = 0; j < w; ++j)
                CHECK(m.mask(i, j) == m.mask((h - i) % h, (w - j) % w));
    }
}

TEST_CASE("band split partitions the latent exactly") {
    std::mt19937_64 rng(3);
    for (double r : {0.0, 0.3, 0.7, 1.0}) {
        const FeatureTensor z = random_latent(rng, 16, 16, 3);
        const BandSplit split = band_split(z, r);
        for (std::size_t i = 0; i < z.data.size(); ++i)
            CHECK(std::abs(double(split.z_low.data[i]) + double(split.z_high.data[i]) -
                           double(z.data[i])) <= 1e-5);
        const double total = tensor_energy(z);
        CHECK(split.energy_low + split.energy_high ==
              doctest::Approx(total).epsilon(1e-6));
    }
    // non-power-of-two spatial size goes through the direct transform
    const FeatureTensor z = random_latent(rng, 6, 10, 2);
    const BandSplit split = band_split(z, 0.5);
    for (std::size_t i = 0; i < z.data.size(); ++i)
        CHECK(std::abs(double(split.z_low.data[i]) + double(split.z_high.data[i]) -
                       double(z.data[i])) <= 1e-5);
}

TEST_CASE("full-radius and constant latents are pure low band") {
    std::mt19937_64 rng(4);
    const FeatureTensor z = random_latent(rng, 8, 8, 2);
    const BandSplit all = band_split(z, 1.0);
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        CHECK(std::abs(double(all.z_low.data[i]) - double(z.data[i])) <= 1e-6);
        CHECK(std::abs(double(all.z_high.data[i])) <= 1e-6);
    }

    FeatureTensor constant;
    constant.dims = {8, 8, 1};
    constant.data.assign(64, 3.0f);
    for (double r : {0.0, 0.25}) {
        const BandSplit split = band_split(constant, r);
        CHECK(std::sqrt(split.energy_high) <= 1e-6);
    }
}

TEST_CASE("a +-1 checkerboard concentrates at the nyquist corner") {
    FeatureTensor board;
    board.dims = {16, 16, 1};
    board.data.resize(256);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) board.data[i * 16 + j] = ((i + j) % 2) ? -1.0f : 1.0f;
    const BandSplit split = band_split(board, 0.5);
    CHECK(split.energy_high / (split.energy_low + split.energy_high) >= 0.99);
}

TEST_CASE("low band is a projection and the split is linear") {
    std::mt19937_64 rng(5);
    const FeatureTensor z1 = random_latent(rng, 16, 16, 2);
    const FeatureTensor z2 = random_latent(rng, 16, 16, 2);

    const BandSplit s1 = band_split(z1, 0.4);
    const BandSplit idem = band_split(s1.z_low, 0.4);
    for (std::size_t i = 0; i < z1.data.size(); ++i)
        CHECK(std::abs(double(idem.z_low.data[i]) - double(s1.z_low.data[i])) <= 1e-5);

    FeatureTensor combo = z1;
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = 2.0f * z1.data[i] - 3.0f * z2.data[i];
    const BandSplit sc = band_split(combo, 0.4);
    const BandSplit s2 = band_split(z2, 0.4);
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        CHECK(std::abs(double(sc.z_low.data[i]) -
                       (2.0 * double(s1.z_low.data[i]) - 3.0 * double(s2.z_low.data[i]))) <=
              1e-4);
}

TEST_CASE("band energy profile endpoints and monotonicity") {
    std::mt19937_64 rng(6);
    const FeatureTensor z = random_latent(rng, 16, 16, 2);
    const auto ends = band_energy_profile(z, {0.0, 1.0});
    CHECK(ends.back().second == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ends.front().second < 0.5);  // dc fraction of white noise is tiny

    std::vector<double> radii;
    for (int i = 0; i <= 10; ++i) radii.push_back(i / 10.0);
    const auto profile = band_energy_profile(z, radii);
    for (std::size_t i = 1; i < profile.size(); ++i)
        CHECK(profile[i].second >= profile[i - 1].second - 1e-12);

    CHECK_THROWS_AS(band_energy_profile(z, {0.5, 0.2}), ValidationError);
}

TEST_CASE("white-noise low-band fraction matches the passed-bin fraction") {
    std::mt19937_64 rng(7);
    std::vector<double> radii = {0.25, 0.5, 0.75};
    std::vector<double> acc(radii.size(), 0.0);
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const FeatureTensor z = random_latent(rng, 16, 16, 1);
        const auto profile = band_energy_profile(z, radii);
        for (std::size_t i = 0; i < radii.size(); ++i) acc[i] += profile[i].second;
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double expected =
            static_cast<double>(radial_mask(16, 16, radii[i]).passed_count()) / 256.0;
        CHECK(acc[i] / seeds == doctest::Approx(expected).epsilon(0.05));
    }
}
