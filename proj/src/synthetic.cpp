#include "repack/synthetic.hpp"

#include <random>

#include <Eigen/QR>

namespace repack {

namespace {

constexpr double kMeanScale = 2.0;
constexpr double kMinMeanDistance = 4.0;  // in whitened (unit-covariance) coordinates

void validate(const SyntheticSpec& spec) {
    if (spec.embed_dim == 0 || spec.intrinsic_dim == 0)
        throw ValidationError("embed_dim and intrinsic_dim must be positive");
    if (spec.intrinsic_dim > spec.embed_dim)
        throw ValidationError("intrinsic_dim " + std::to_string(spec.intrinsic_dim) +
                              " exceeds embed_dim " + std::to_string(spec.embed_dim));
    if (spec.noise_radius < 0.0)
        throw ValidationError("noise_radius must be >= 0");
    if (spec.cluster_count == 0)
        throw ValidationError("cluster_count must be positive");
}

// Seeded random orthonormal basis: QR of a Gaussian matrix, signs fixed
// by R's diagonal so the result is unique.
Matrix random_orthonormal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < cols; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

Matrix draw_cluster_means(std::mt19937_64& rng, Eigen::Index k, Eigen::Index dim) {
    std::normal_distribution<double> normal(0.0, kMeanScale);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        Matrix means(k, dim);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) means(i, j) = normal(rng);
        bool ok = true;
        for (Eigen::Index a = 0; a < k && ok; ++a)
            for (Eigen::Index b = a + 1; b < k && ok; ++b)
                if ((means.row(a) - means.row(b)).norm() < kMinMeanDistance) ok = false;
        if (ok) return means;
    }
    throw ValidationError("could not place " + std::to_string(k) +
                          " cluster means at pairwise distance >= 4 in " +
                          std::to_string(dim) + " dimensions");
}

}  // namespace

ParityResult element_count_parity(const DatasetSpec& spec) {
    if (spec.image_height == 0 || spec.image_width == 0 || spec.patch_size == 0 ||
        spec.embed_dim == 0)
        throw ValidationError("dataset spec fields must be positive");
    if (spec.image_height % spec.patch_size != 0 || spec.image_width % spec.patch_size != 0)
        throw ValidationError("image size must be divisible by patch size");
    const std::uint64_t h = spec.image_height / spec.patch_size;
    const std::uint64_t w = spec.image_width / spec.patch_size;
    ParityResult r;
    r.feature_elements = h * w * spec.embed_dim;
    r.pixel_elements = std::uint64_t(spec.image_height) * spec.image_width * 3;
    r.ratio = static_cast<double>(r.feature_elements) / static_cast<double>(r.pixel_elements);
    return r;
}

SyntheticData gen_synthetic_features(const SyntheticSpec& spec, std::size_t n_rows) {
    validate(spec);
    if (n_rows < spec.intrinsic_dim)
        throw ValidationError("n_rows must be >= intrinsic_dim");

    const auto big_d = static_cast<Eigen::Index>(spec.embed_dim);
    const auto d_star = static_cast<Eigen::Index>(spec.intrinsic_dim);
    const auto rows = static_cast<Eigen::Index>(n_rows);

    // Fixed draw order: basis, means, then per-row (label, core, noise).
    std::mt19937_64 rng(spec.seed);
    Matrix basis = random_orthonormal(rng, big_d, d_star);
    Matrix means = draw_cluster_means(rng, static_cast<Eigen::Index>(spec.cluster_count), d_star);

    std::uniform_int_distribution<int> pick(0, static_cast<int>(spec.cluster_count) - 1);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double sigma_noise = spec.noise_radius / std::sqrt(static_cast<double>(big_d));

    Matrix z(rows, big_d);
    std::vector<int> labels(n_rows);
    Vector core(d_star), noise(big_d);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const int label = pick(rng);
        labels[static_cast<std::size_t>(i)] = label;
        for (Eigen::Index j = 0; j < d_star; ++j) core(j) = means(label, j) + unit(rng);
        z.row(i) = (basis * core).transpose();
        if (spec.noise_radius > 0.0) {
            for (Eigen::Index j = 0; j < big_d; ++j) noise(j) = sigma_noise * unit(rng);
            const double norm = noise.norm();
            if (norm > spec.noise_radius) noise *= spec.noise_radius / norm;
            z.row(i) += noise.transpose();
        }
    }

    SyntheticData out;
    out.features = from_matrix(z);
    out.basis = from_matrix(basis);
    out.labels = std::move(labels);
    return out;
}

}  // namespace repack
