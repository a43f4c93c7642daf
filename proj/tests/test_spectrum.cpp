#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "repack/spectrum.hpp"
#include "repack/synthetic.hpp"

using namespace repack;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
    const Matrix g = random_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("rank-1 data concentrates all variance in one component") {
    std::mt19937_64 rng(5);
    const Vector dir = random_matrix(rng, 8, 1).col(0).normalized();
    Matrix z(50, 8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < 50; ++i) z.row(i) = n(rng) * dir.transpose();
    const PcaResult pca = pca_spectrum(z);
    CHECK(pca.report.explained_ratio(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pca.report.effective_rank == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("iid gaussian spectrum is near flat") {
    std::mt19937_64 rng(17);
    const Eigen::Index d = 32;
    const Matrix z = random_matrix(rng, 100000, d);
    const PcaResult pca = pca_spectrum(z);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double expected = static_cast<double>(k + 1) / static_cast<double>(d);
        CHECK(pca.report.cumulative_ratio(k) == doctest::Approx(expected).epsilon(0.10));
    }
}

TEST_CASE("data-svd and covariance paths agree within 1e-6 relative") {
    std::mt19937_64 rng(23);
    const Matrix z = random_matrix(rng, 200, 24);
    const PcaResult a = pca_spectrum(z, PcaMethod::kDataSvd);
    const PcaResult b = pca_spectrum(z, PcaMethod::kCovarianceEigen);
    REQUIRE(a.report.eigenvalues.size() == b.report.eigenvalues.size());
    for (Eigen::Index i = 0; i < a.report.eigenvalues.size(); ++i) {
        const double denom = std::max(1e-300, b.report.eigenvalues(i));
        CHECK(std::abs(a.report.eigenvalues(i) - b.report.eigenvalues(i)) / denom <= 1e-6);
    }
    // wide case uses the svd path and still yields min(M,D) eigenvalues
    const Matrix wide = random_matrix(rng, 10, 40);
    CHECK(pca_spectrum(wide).report.eigenvalues.size() == 10);
}

TEST_CASE("eigenvalues match an independent jacobi solver") {
    std::mt19937_64 rng(31);
    const Matrix z = random_matrix(rng, 60, 9);
    const Vector mean = z.colwise().mean();
    const Matrix centered = z.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / 59.0;
    const Vector expected = oracles::jacobi_eigenvalues(cov);
    const PcaResult pca = pca_spectrum(z);
    for (Eigen::Index i = 0; i < 9; ++i)
        CHECK(pca.report.eigenvalues(i) == doctest::Approx(expected(i)).epsilon(1e-9));
}

TEST_CASE("eigenvalues are rotation invariant and scale as c^2") {
    std::mt19937_64 rng(47);
    const Matrix z = random_matrix(rng, 120, 12);
    const Matrix r = random_orthogonal(rng, 12);
    const PcaResult base = pca_spectrum(z);
    const PcaResult rotated = pca_spectrum(Matrix(z * r));
    const PcaResult scaled = pca_spectrum(Matrix(2.5 * z));
    for (Eigen::Index i = 0; i < 12; ++i) {
        CHECK(rotated.report.eigenvalues(i) ==
              doctest::Approx(base.report.eigenvalues(i)).epsilon(1e-6));
        CHECK(scaled.report.eigenvalues(i) ==
              doctest::Approx(6.25 * base.report.eigenvalues(i)).epsilon(1e-9));
        CHECK(scaled.report.explained_ratio(i) ==
              doctest::Approx(base.report.explained_ratio(i)).epsilon(1e-9));
    }
}

TEST_CASE("constant input has no spectrum") {
    Matrix z = Matrix::Constant(10, 4, 3.25);
    CHECK_THROWS_AS(pca_spectrum(z), DegenerateSpectrumError);
    CHECK_THROWS_AS(pca_spectrum(Matrix(z.topRows(1))), ValidationError);  // M < 2
}

TEST_CASE("elbow lands on the variance cliff") {
    // eigenvalues [1 x8, 1e-4 x56]; expected index frozen from the chord scan
    SpectrumReport rep;
    rep.eigenvalues.resize(64);
    for (int i = 0; i < 64; ++i) rep.eigenvalues(i) = i < 8 ? 1.0 : 1e-4;
    const double total = rep.eigenvalues.sum();
    rep.explained_ratio = rep.eigenvalues / total;
    rep.cumulative_ratio.resize(64);
    double acc = 0;
    for (int i = 0; i < 64; ++i) {
        acc += rep.explained_ratio(i);
        rep.cumulative_ratio(i) = acc;
    }
    CHECK(oracles::chord_scan_elbow(rep.cumulative_ratio) == 8);
    auto elbow = elbow_detect(rep);
    REQUIRE(elbow.has_value());
    CHECK(*elbow == 8);
}

TEST_CASE("a linear cumulative curve has no elbow") {
    SpectrumReport rep;
    rep.eigenvalues = Vector::Constant(16, 2.0);
    rep.explained_ratio = Vector::Constant(16, 1.0 / 16.0);
    rep.cumulative_ratio.resize(16);
    for (int i = 0; i < 16; ++i) rep.cumulative_ratio(i) = (i + 1) / 16.0;
    CHECK_FALSE(elbow_detect(rep).has_value());

    SpectrumReport tiny;
    tiny.cumulative_ratio = Vector::Constant(2, 1.0);
    CHECK_THROWS_AS(elbow_detect(tiny), ValidationError);
}

TEST_CASE("elbow recovers the intrinsic dimension of synthetic data") {
    SyntheticSpec spec;
    spec.embed_dim = 64;
    spec.intrinsic_dim = 8;
    spec.noise_radius = 0.1;
    spec.cluster_count = 4;
    spec.seed = 2024;
    const SyntheticData data = gen_synthetic_features(spec, 4096);
    const PcaResult pca = pca_spectrum(data.features);
    REQUIRE(pca.report.elbow_index.has_value());
    CHECK(*pca.report.elbow_index >= 7);
    CHECK(*pca.report.elbow_index <= 9);
}

TEST_CASE("effective rank closed forms") {
    SpectrumReport flat;
    flat.eigenvalues = Vector::Constant(32, 0.5);
    flat.explained_ratio = Vector::Constant(32, 1.0 / 32.0);
    CHECK(effective_rank(flat) == doctest::Approx(32.0).epsilon(1e-6));

    SpectrumReport rank1;
    rank1.eigenvalues = Vector::Zero(8);
    rank1.eigenvalues(0) = 3.0;
    rank1.explained_ratio = Vector::Zero(8);
    rank1.explained_ratio(0) = 1.0;
    CHECK(effective_rank(rank1) == doctest::Approx(1.0).epsilon(1e-12));

    SpectrumReport two;
    two.eigenvalues = Vector::Zero(6);
    two.eigenvalues(0) = two.eigenvalues(1) = 1.0;
    two.explained_ratio = Vector::Zero(6);
    two.explained_ratio(0) = two.explained_ratio(1) = 0.5;
    CHECK(effective_rank(two) == doctest::Approx(2.0).epsilon(1e-12));
}
