#include <doctest.h>

#include <filesystem>
#include <random>

#include "repack/pack.hpp"
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

}  // namespace

TEST_CASE("projector is linear and bias-free") {
    std::mt19937_64 rng(1);
    Projector p;
    p.weight = random_matrix(rng, 4, 10);
    CHECK(p.apply(Matrix::Zero(3, 10)).cwiseAbs().maxCoeff() == 0.0);

    // identity selector picks the first d columns
    Projector sel;
    sel.weight = Matrix::Zero(3, 10);
    for (int i = 0; i < 3; ++i) sel.weight(i, i) = 1.0;
    const Matrix z = random_matrix(rng, 5, 10);
    CHECK((sel.apply(z) - z.leftCols(3)).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(p.apply(Matrix::Zero(3, 9)), ShapeError);
}

TEST_CASE("parameter count is d*D without bias and (D+1)*d with it") {
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 32;
    cfg.decoder = DecoderKind::kLinear;
    std::mt19937_64 rng(2);
    const Matrix z = random_matrix(rng, 64, 768);
    PackModel m = train_pack(z, 32, cfg).model;
    CHECK(m.projector.weight.size() == 32 * 768);  // 24576
    CHECK_FALSE(m.projector.has_bias());

    cfg.projector_bias = true;
    PackModel mb = train_pack(z, 32, cfg).model;
    CHECK(mb.projector.weight.size() + mb.projector.bias.size() == 769 * 32);  // 24608
}

TEST_CASE("pca_truncate is exact at full rank and on-manifold data") {
    std::mt19937_64 rng(3);
    const Matrix z = random_matrix(rng, 40, 6);
    const PcaTruncation full = pca_truncate(z, 6);
    CHECK((full.core - z).cwiseAbs().maxCoeff() <= 1e-6);

    SyntheticSpec spec;
    spec.embed_dim = 24;
    spec.intrinsic_dim = 5;
    spec.noise_radius = 0.0;
    spec.cluster_count = 3;
    spec.seed = 8;
    const Matrix data = to_matrix(gen_synthetic_features(spec, 400).features);
    const PcaTruncation t = pca_truncate(data, 5);
    CHECK((t.core - data).squaredNorm() / static_cast<double>(data.size()) <= 1e-8);

    CHECK_THROWS_AS(pca_truncate(z, 7), RangeError);
}

TEST_CASE("pca_truncate residual energy equals the discarded eigenvalues") {
    std::mt19937_64 rng(4);
    const Matrix z = random_matrix(rng, 5, 3);
    const PcaTruncation t = pca_truncate(z, 2);
    const double residual_energy = (z - t.core).squaredNorm();
    const PcaResult pca = pca_spectrum(z);
    double discarded = 0.0;
    for (Eigen::Index i = 2; i < pca.report.eigenvalues.size(); ++i)
        discarded += pca.report.eigenvalues(i);
    CHECK(residual_energy ==
          doctest::Approx(discarded * (z.rows() - 1)).epsilon(1e-6));
}

TEST_CASE("manifold decomposition is additive and orthogonal") {
    std::mt19937_64 rng(5);
    const Matrix z = random_matrix(rng, 30, 12);
    const PcaTruncation t = pca_truncate(z, 4);
    const ManifoldDecomposition dec = decompose_manifold(z, t.basis);
    CHECK((dec.z_core + dec.z_noise - z).cwiseAbs().maxCoeff() <= 1e-6);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double row_norm = std::max(1.0, dec.z_noise.row(i).norm());
        for (Eigen::Index j = 0; j < 4; ++j)
            CHECK(std::abs(dec.z_noise.row(i).dot(t.basis.col(j))) <= 1e-6 * row_norm);
    }
    CHECK_THROWS_AS(decompose_manifold(z, Matrix(2.0 * t.basis)), ValidationError);
}

TEST_CASE("rows inside the span have no residual; orthogonal rows keep the mean") {
    Matrix basis = Matrix::Zero(6, 2);
    basis(0, 0) = 1.0;
    basis(1, 1) = 1.0;

    std::mt19937_64 rng(6);
    Matrix inside = Matrix::Zero(20, 6);
    inside.leftCols(2) = random_matrix(rng, 20, 2);
    const ManifoldDecomposition in_dec = decompose_manifold(inside, basis);
    CHECK(in_dec.residual_norms.maxCoeff() <= 1e-6);

    // rows entirely outside the span: core collapses to the column mean
    Matrix outside = Matrix::Zero(20, 6);
    outside.rightCols(4) = random_matrix(rng, 20, 4);
    const ManifoldDecomposition out_dec = decompose_manifold(outside, basis);
    const Vector mean = outside.colwise().mean();
    for (Eigen::Index i = 0; i < outside.rows(); ++i) {
        CHECK((out_dec.z_core.row(i).transpose() - mean).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((out_dec.z_noise.row(i) - (outside.row(i) - mean.transpose()))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-9);
    }
}

TEST_CASE("decomposition against the true basis respects the noise bound") {
    SyntheticSpec spec;
    spec.embed_dim = 64;
    spec.intrinsic_dim = 8;
    spec.noise_radius = 0.1;
    spec.cluster_count = 4;
    spec.seed = 77;
    const SyntheticData data = gen_synthetic_features(spec, 2048);
    const ManifoldDecomposition dec =
        decompose_manifold(to_matrix(data.features), to_matrix(data.basis));
    CHECK(dec.residual_norms.maxCoeff() <= spec.noise_radius + 1e-6);
}

TEST_CASE("reconstruction losses have their closed forms") {
    std::mt19937_64 rng(7);
    const Matrix a = random_matrix(rng, 8, 5);
    CHECK(reconstruction_loss_l1(a, a) == 0.0);
    CHECK(reconstruction_loss_l2(a, a) == 0.0);
    const Matrix b = a.array() + 0.5;
    CHECK(reconstruction_loss_l1(a, b) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(reconstruction_loss_l2(a, b) == doctest::Approx(0.25).epsilon(1e-12));

    // decoded = 0 -> mean absolute target, by brute force
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) acc += std::abs(a(i, j));
    CHECK(reconstruction_loss_l1(Matrix::Zero(8, 5), a) ==
          doctest::Approx(acc / 40.0).epsilon(1e-12));

    CHECK_THROWS_AS(reconstruction_loss_l1(a, Matrix::Zero(8, 4)), ShapeError);
}

TEST_CASE("identity-width training drives the loss to zero") {
    std::mt19937_64 rng(8);
    const Matrix z = random_matrix(rng, 256, 6);
    TrainConfig cfg;
    cfg.epochs = 800;
    cfg.batch = 256;
    cfg.lr = 0.4;
    cfg.seed = 5;
    cfg.decoder = DecoderKind::kLinear;
    cfg.objective = Objective::kL2;
    const TrainResult res = train_pack(z, 6, cfg);
    CHECK(res.loss_curve.back() <= 1e-4);
}

TEST_CASE("training is deterministic per seed") {
    std::mt19937_64 rng(9);
    const Matrix z = random_matrix(rng, 128, 10);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch = 32;
    cfg.lr = 0.05;
    cfg.seed = 42;
    const TrainResult a = train_pack(z, 3, cfg);
    const TrainResult b = train_pack(z, 3, cfg);
    REQUIRE(a.loss_curve.size() == b.loss_curve.size());
    for (std::size_t i = 0; i < a.loss_curve.size(); ++i)
        CHECK(a.loss_curve[i] == b.loss_curve[i]);
    CHECK((a.model.projector.weight - b.model.projector.weight).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trained linear bottleneck approaches but never beats pca") {
    SyntheticSpec spec;
    spec.embed_dim = 32;
    spec.intrinsic_dim = 6;
    spec.noise_radius = 0.1;
    spec.cluster_count = 3;
    spec.seed = 21;
    const Matrix z = to_matrix(gen_synthetic_features(spec, 1024).features);
    const double pca_mse = reconstruction_loss_l2(pca_truncate(z, 6).core, z);

    TrainConfig cfg;
    cfg.epochs = 1500;
    cfg.batch = 1024;
    cfg.lr = 0.4;
    cfg.seed = 31;
    cfg.decoder = DecoderKind::kLinear;
    cfg.objective = Objective::kL2;
    const TrainResult res = train_pack(z, 6, cfg);
    const double trained_mse = reconstruction_loss_l2(res.model.reconstruct(z), z);
    CHECK(trained_mse >= pca_mse - 1e-6);          // optimality lower bound
    CHECK(trained_mse <= 1.05 * pca_mse);          // and training gets close
}

TEST_CASE("gradients match finite differences for every configuration") {
    std::mt19937_64 rng(10);
    for (auto decoder : {DecoderKind::kLinear, DecoderKind::kMlp}) {
        for (auto objective : {Objective::kL2, Objective::kL1}) {
            for (bool bias : {false, true}) {
                TrainConfig cfg;
                cfg.epochs = 1;
                cfg.batch = 8;
                cfg.lr = 0.01;
                cfg.seed = rng();
                cfg.decoder = decoder;
                cfg.objective = objective;
                cfg.hidden = 7;
                cfg.projector_bias = bias;
                const Matrix batch = random_matrix(rng, 6, 9);
                PackModel model = train_pack(batch, 4, cfg).model;
                CHECK(grad_check(model, batch, objective) <= 1e-4);
            }
        }
    }
}

TEST_CASE("zero model on zero batch has zero gradient error") {
    PackModel model;
    model.projector.weight = Matrix::Zero(2, 4);
    model.decoder.kind = DecoderKind::kLinear;
    model.decoder.w1 = Matrix::Zero(4, 2);
    model.decoder.b1 = Vector::Zero(4);
    CHECK(grad_check(model, Matrix::Zero(4, 4), Objective::kL2) == 0.0);
}

TEST_CASE("a corrupted gradient is flagged") {
    std::mt19937_64 rng(11);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 8;
    cfg.seed = 13;
    cfg.decoder = DecoderKind::kLinear;
    const Matrix batch = random_matrix(rng, 6, 5);
    PackModel model = train_pack(batch, 3, cfg).model;

    std::vector<double> grad;
    model.loss_and_grad(batch, batch, Objective::kL2, grad);
    // negate the largest-magnitude entry
    std::size_t worst = 0;
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (std::abs(grad[i]) > std::abs(grad[worst])) worst = i;
    grad[worst] = -grad[worst];
    const double err = max_relative_gradient_error(
        model.parameter_refs(), grad,
        [&]() { return model.loss(batch, batch, Objective::kL2); });
    CHECK(err >= 0.5);
}

TEST_CASE("training diverges loudly under an absurd learning rate") {
    std::mt19937_64 rng(12);
    const Matrix z = 100.0 * random_matrix(rng, 64, 8);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch = 64;
    cfg.lr = 1e18;
    cfg.seed = 3;
    cfg.objective = Objective::kL2;
    CHECK_THROWS_AS(train_pack(z, 4, cfg), DivergenceError);
}

TEST_CASE("model files roundtrip through the container") {
    std::mt19937_64 rng(13);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch = 16;
    cfg.seed = 7;
    cfg.decoder = DecoderKind::kMlp;
    cfg.hidden = 5;
    const Matrix z = random_matrix(rng, 32, 6);
    const PackModel model = train_pack(z, 2, cfg).model;
    const auto path =
        (std::filesystem::temp_directory_path() / "pack_model.rpkm").string();
    model.save(path);
    const PackModel back = PackModel::load(path);
    CHECK(back.decoder.kind == DecoderKind::kMlp);
    // float32 storage: weights agree to single precision
    CHECK((back.projector.weight - model.projector.weight).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((back.decoder.w2 - model.decoder.w2).cwiseAbs().maxCoeff() <= 1e-6);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".meta");
}
