#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "repack/spectrum.hpp"
#include "repack/tensor.hpp"

namespace repack {

enum class Objective { kL1, kL2 };
enum class DecoderKind { kLinear, kMlp };

// Bias-free linear map D -> d; parameter count is exactly out_dim * in_dim.
// An optional bias is supported behind a flag for the (in_dim+1)*out_dim
// parameter accounting variant, off by default.
struct Projector {
    Matrix weight;  // d x D
    Vector bias;    // empty unless enabled

    Eigen::Index in_dim() const { return weight.cols(); }
    Eigen::Index out_dim() const { return weight.rows(); }
    bool has_bias() const { return bias.size() > 0; }

    // Rows of z mapped by the weight; bias-free by default, so 0 -> 0.
    Matrix apply(const Matrix& rows) const;
};

// Small decoder head: single affine map, or one tanh hidden layer.
struct ToyDecoder {
    DecoderKind kind = DecoderKind::kLinear;
    Matrix w1;  // linear: out x d. mlp: hidden x d
    Vector b1;
    Matrix w2;  // mlp only: out x hidden
    Vector b2;

    Eigen::Index in_dim() const { return w1.cols(); }
    Eigen::Index out_dim() const {
        return kind == DecoderKind::kLinear ? w1.rows() : w2.rows();
    }
    Matrix apply(const Matrix& latent) const;
};

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch = 256;
    double lr = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    DecoderKind decoder = DecoderKind::kLinear;
    Objective objective = Objective::kL1;
    std::size_t hidden = 128;  // mlp hidden width
    bool projector_bias = false;
};

struct PackModel {
    Projector projector;
    ToyDecoder decoder;
    TrainConfig cfg;

    Matrix project(const Matrix& rows) const { return projector.apply(rows); }
    Matrix reconstruct(const Matrix& rows) const {
        return decoder.apply(projector.apply(rows));
    }

    // Flat views over every trainable scalar, in a fixed order shared with
    // the gradient vector returned by loss_and_grad.
    std::vector<double*> parameter_refs();
    std::size_t parameter_count() const;

    double loss(const Matrix& batch, const Matrix& target, Objective obj) const;
    // Reverse-mode gradients through projector and decoder; returns the loss.
    double loss_and_grad(const Matrix& batch, const Matrix& target, Objective obj,
                         std::vector<double>& grad) const;

    void save(const std::string& path) const;  // RPKM container + text sidecar
    static PackModel load(const std::string& path);
};

Matrix project(const Projector& p, const Matrix& rows);
FeatureTensor project(const Projector& p, const FeatureTensor& rows);

// Eckart-Young optimal rank-d linear reconstruction via PCA truncation.
struct PcaTruncation {
    Matrix core;    // M x D reconstruction (back-projection plus mean)
    Matrix packed;  // M x d centered scores
    Matrix basis;   // D x d top principal directions
    Vector mean;
};
PcaTruncation pca_truncate(const Matrix& rows, Eigen::Index d);

// z_core + z_noise == input exactly; noise rows orthogonal to the basis.
struct ManifoldDecomposition {
    Matrix z_core;
    Matrix z_noise;
    Vector residual_norms;
};
// basis columns must be orthonormal (Gram deviation <= 1e-6). Rows are
// centered by their column mean before projection, matching pca_truncate.
ManifoldDecomposition decompose_manifold(const Matrix& rows, const Matrix& basis);

double reconstruction_loss_l1(const Matrix& decoded, const Matrix& target);
double reconstruction_loss_l2(const Matrix& decoded, const Matrix& target);

struct TrainResult {
    PackModel model;
    std::vector<double> loss_curve;  // per-epoch mean training loss
};

// Minibatch momentum SGD on decoder(project(Z)) against Z itself, or
// against explicit paired targets. Deterministic per cfg.seed.
TrainResult train_pack(const Matrix& rows, Eigen::Index d, const TrainConfig& cfg);
TrainResult train_pack(const Matrix& rows, const Matrix& targets, Eigen::Index d,
                       const TrainConfig& cfg);

// Central-difference comparison (step 1e-4, 64-bit accumulation) of an
// analytic gradient against the loss closure; worst relative error under
// |a-n| / max(1e-8, |a|+|n|). Shared by every trainable module.
double max_relative_gradient_error(const std::vector<double*>& params,
                                   const std::vector<double>& analytic,
                                   const std::function<double()>& loss,
                                   double step = 1e-4);

double grad_check(PackModel& model, const Matrix& batch, Objective obj);

}  // namespace repack
