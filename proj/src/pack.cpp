#include "repack/pack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "repack/tensor_io.hpp"

namespace repack {

namespace {

void append_refs(std::vector<double*>& out, Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
}
void append_refs(std::vector<double*>& out, Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
}
void append_grad(std::vector<double>& out, const Matrix& g) {
    out.insert(out.end(), g.data(), g.data() + g.size());
}
void append_grad(std::vector<double>& out, const Vector& g) {
    out.insert(out.end(), g.data(), g.data() + g.size());
}

Matrix seeded_uniform(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                      double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

void check_same_dims(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(what) + ": dimension mismatch " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

// dLoss/dDecoded for the mean-reduced objectives.
Matrix loss_gradient(const Matrix& decoded, const Matrix& target, Objective obj) {
    const double n = static_cast<double>(decoded.size());
    if (obj == Objective::kL2) return 2.0 / n * (decoded - target);
    Matrix g = (decoded - target).unaryExpr([](double v) -> double {
        return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    });
    return g / n;
}

}  // namespace

Matrix Projector::apply(const Matrix& rows) const {
    if (rows.cols() != in_dim())
        throw ShapeError("projector expects " + std::to_string(in_dim()) +
                         " columns, got " + std::to_string(rows.cols()));
    Matrix out = rows * weight.transpose();
    if (has_bias()) out.rowwise() += bias.transpose();
    return out;
}

Matrix ToyDecoder::apply(const Matrix& latent) const {
    if (latent.cols() != in_dim())
        throw ShapeError("decoder expects " + std::to_string(in_dim()) +
                         " columns, got " + std::to_string(latent.cols()));
    Matrix h = latent * w1.transpose();
    h.rowwise() += b1.transpose();
    if (kind == DecoderKind::kLinear) return h;
    h = h.array().tanh().matrix();
    Matrix out = h * w2.transpose();
    out.rowwise() += b2.transpose();
    return out;
}

Matrix project(const Projector& p, const Matrix& rows) { return p.apply(rows); }

FeatureTensor project(const Projector& p, const FeatureTensor& rows) {
    return from_matrix(p.apply(to_matrix(rows)));
}

std::vector<double*> PackModel::parameter_refs() {
    std::vector<double*> refs;
    append_refs(refs, projector.weight);
    if (projector.has_bias()) append_refs(refs, projector.bias);
    append_refs(refs, decoder.w1);
    append_refs(refs, decoder.b1);
    if (decoder.kind == DecoderKind::kMlp) {
        append_refs(refs, decoder.w2);
        append_refs(refs, decoder.b2);
    }
    return refs;
}

std::size_t PackModel::parameter_count() const {
    std::size_t n = static_cast<std::size_t>(projector.weight.size()) +
                    static_cast<std::size_t>(projector.bias.size()) +
                    static_cast<std::size_t>(decoder.w1.size()) +
                    static_cast<std::size_t>(decoder.b1.size());
    if (decoder.kind == DecoderKind::kMlp)
        n += static_cast<std::size_t>(decoder.w2.size()) +
             static_cast<std::size_t>(decoder.b2.size());
    return n;
}

double PackModel::loss(const Matrix& batch, const Matrix& target, Objective obj) const {
    const Matrix decoded = reconstruct(batch);
    return obj == Objective::kL1 ? reconstruction_loss_l1(decoded, target)
                                 : reconstruction_loss_l2(decoded, target);
}

double PackModel::loss_and_grad(const Matrix& batch, const Matrix& target, Objective obj,
                                std::vector<double>& grad) const {
    // forward, keeping intermediates
    const Matrix z = projector.apply(batch);
    Matrix pre1 = z * decoder.w1.transpose();
    pre1.rowwise() += decoder.b1.transpose();
    Matrix h;  // mlp hidden activation
    Matrix decoded;
    if (decoder.kind == DecoderKind::kLinear) {
        decoded = pre1;
    } else {
        h = pre1.array().tanh().matrix();
        decoded = h * decoder.w2.transpose();
        decoded.rowwise() += decoder.b2.transpose();
    }
    check_same_dims(decoded, target, "loss");
    const double loss_value = obj == Objective::kL1
                                  ? reconstruction_loss_l1(decoded, target)
                                  : reconstruction_loss_l2(decoded, target);

    // backward
    const Matrix g_out = loss_gradient(decoded, target, obj);
    Matrix g_w2, g_pre1;
    Vector g_b2;
    if (decoder.kind == DecoderKind::kLinear) {
        g_pre1 = g_out;
    } else {
        g_w2 = g_out.transpose() * h;
        g_b2 = g_out.colwise().sum();
        const Matrix g_h = g_out * decoder.w2;
        g_pre1 = g_h.cwiseProduct((1.0 - h.array().square()).matrix());
    }
    const Matrix g_w1 = g_pre1.transpose() * z;
    const Vector g_b1 = g_pre1.colwise().sum();
    const Matrix g_z = g_pre1 * decoder.w1;
    const Matrix g_proj = g_z.transpose() * batch;

    grad.clear();
    grad.reserve(parameter_count());
    append_grad(grad, g_proj);
    if (projector.has_bias()) append_grad(grad, Vector(g_z.colwise().sum()));
    append_grad(grad, g_w1);
    append_grad(grad, g_b1);
    if (decoder.kind == DecoderKind::kMlp) {
        append_grad(grad, g_w2);
        append_grad(grad, g_b2);
    }
    return loss_value;
}

double reconstruction_loss_l1(const Matrix& decoded, const Matrix& target) {
    check_same_dims(decoded, target, "reconstruction_loss_l1");
    return (decoded - target).cwiseAbs().sum() / static_cast<double>(decoded.size());
}

double reconstruction_loss_l2(const Matrix& decoded, const Matrix& target) {
    check_same_dims(decoded, target, "reconstruction_loss_l2");
    return (decoded - target).squaredNorm() / static_cast<double>(decoded.size());
}

PcaTruncation pca_truncate(const Matrix& rows, Eigen::Index d) {
    PcaResult pca = pca_spectrum(rows);
    if (d < 1 || d > pca.directions.cols())
        throw RangeError("pca_truncate: d = " + std::to_string(d) + " not in [1, " +
                         std::to_string(pca.directions.cols()) + "]");
    PcaTruncation t;
    t.basis = pca.directions.leftCols(d);
    t.mean = pca.mean;
    const Matrix centered = rows.rowwise() - pca.mean.transpose();
    t.packed = centered * t.basis;
    t.core = (t.packed * t.basis.transpose()).rowwise() + pca.mean.transpose();
    return t;
}

ManifoldDecomposition decompose_manifold(const Matrix& rows, const Matrix& basis) {
    if (basis.rows() != rows.cols())
        throw ShapeError("basis row count must equal feature dimension");
    const Matrix gram = basis.transpose() * basis;
    const double deviation =
        (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
    if (deviation > 1e-6)
        throw ValidationError("basis columns are not orthonormal (Gram deviation " +
                              std::to_string(deviation) + ")");
    ManifoldDecomposition dec;
    const Vector mean = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - mean.transpose();
    dec.z_core = ((centered * basis) * basis.transpose()).rowwise() + mean.transpose();
    dec.z_noise = rows - dec.z_core;
    dec.residual_norms = dec.z_noise.rowwise().norm();
    return dec;
}

TrainResult train_pack(const Matrix& rows, Eigen::Index d, const TrainConfig& cfg) {
    return train_pack(rows, rows, d, cfg);
}

TrainResult train_pack(const Matrix& rows, const Matrix& targets, Eigen::Index d,
                       const TrainConfig& cfg) {
    const Eigen::Index m = rows.rows();
    const Eigen::Index dim = rows.cols();
    if (m == 0) throw ValidationError("train_pack: empty dataset");
    if (targets.rows() != m) throw ShapeError("train_pack: target row count mismatch");
    if (d < 1 || d > dim)
        throw RangeError("train_pack: d = " + std::to_string(d) + " not in [1, " +
                         std::to_string(dim) + "]");
    if (cfg.epochs == 0 || cfg.batch == 0)
        throw ValidationError("train_pack: epochs and batch must be positive");

    const Eigen::Index out = targets.cols();
    std::mt19937_64 rng(cfg.seed);

    TrainResult res;
    PackModel& model = res.model;
    model.cfg = cfg;
    model.projector.weight =
        seeded_uniform(rng, d, dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    if (cfg.projector_bias) model.projector.bias = Vector::Zero(d);
    model.decoder.kind = cfg.decoder;
    if (cfg.decoder == DecoderKind::kLinear) {
        model.decoder.w1 = seeded_uniform(rng, out, d, 1.0 / std::sqrt(static_cast<double>(d)));
        model.decoder.b1 = Vector::Zero(out);
    } else {
        const auto hidden = static_cast<Eigen::Index>(cfg.hidden);
        model.decoder.w1 =
            seeded_uniform(rng, hidden, d, 1.0 / std::sqrt(static_cast<double>(d)));
        model.decoder.b1 = Vector::Zero(hidden);
        model.decoder.w2 =
            seeded_uniform(rng, out, hidden, 1.0 / std::sqrt(static_cast<double>(hidden)));
        model.decoder.b2 = Vector::Zero(out);
    }

    std::vector<double*> params = model.parameter_refs();
    std::vector<double> velocity(params.size(), 0.0);
    std::vector<double> grad;

    const auto batch_size = std::min<std::size_t>(cfg.batch, static_cast<std::size_t>(m));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);

    res.loss_curve.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch_size < static_cast<std::size_t>(m)) std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < static_cast<std::size_t>(m); start += batch_size) {
            const std::size_t bs = std::min(batch_size, static_cast<std::size_t>(m) - start);
            Matrix xb(bs, dim), yb(bs, out);
            for (std::size_t i = 0; i < bs; ++i) {
                xb.row(static_cast<Eigen::Index>(i)) = rows.row(order[start + i]);
                yb.row(static_cast<Eigen::Index>(i)) = targets.row(order[start + i]);
            }
            const double loss = model.loss_and_grad(xb, yb, cfg.objective, grad);
            if (!std::isfinite(loss))
                throw DivergenceError("non-finite training loss", epoch);
            for (std::size_t i = 0; i < params.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] - cfg.lr * grad[i];
                *params[i] += velocity[i];
            }
            epoch_loss += loss * static_cast<double>(bs);
        }
        res.loss_curve.push_back(epoch_loss / static_cast<double>(m));
    }
    return res;
}

double max_relative_gradient_error(const std::vector<double*>& params,
                                   const std::vector<double>& analytic,
                                   const std::function<double()>& loss, double step) {
    if (params.size() != analytic.size())
        throw ValidationError("gradient length does not match parameter count");
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = *params[i];
        *params[i] = saved + step;
        const double up = loss();
        *params[i] = saved - step;
        const double down = loss();
        *params[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[i];
        const double err = std::abs(a - numeric) /
                           std::max(1e-8, std::abs(a) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

double grad_check(PackModel& model, const Matrix& batch, Objective obj) {
    std::vector<double> analytic;
    model.loss_and_grad(batch, batch, obj, analytic);
    return max_relative_gradient_error(
        model.parameter_refs(), analytic,
        [&]() { return model.loss(batch, batch, obj); });
}

void PackModel::save(const std::string& path) const {
    std::map<std::string, FeatureTensor> tensors;
    tensors["projector.weight"] = from_matrix(projector.weight);
    if (projector.has_bias())
        tensors["projector.bias"] = from_matrix(Matrix(projector.bias.transpose()));
    tensors["decoder.w1"] = from_matrix(decoder.w1);
    tensors["decoder.b1"] = from_matrix(Matrix(decoder.b1.transpose()));
    if (decoder.kind == DecoderKind::kMlp) {
        tensors["decoder.w2"] = from_matrix(decoder.w2);
        tensors["decoder.b2"] = from_matrix(Matrix(decoder.b2.transpose()));
    }
    write_tensor_map(tensors, path);

    std::ofstream meta(path + ".meta", std::ios::trunc);
    if (!meta) throw IoError("cannot write sidecar: " + path + ".meta");
    meta << "# repack pack model config\n";
    meta << "decoder=" << (decoder.kind == DecoderKind::kLinear ? "linear" : "mlp") << "\n";
    meta << "objective=" << (cfg.objective == Objective::kL1 ? "l1" : "l2") << "\n";
    meta << "in_dim=" << projector.in_dim() << "\n";
    meta << "latent_dim=" << projector.out_dim() << "\n";
    meta << "out_dim=" << decoder.out_dim() << "\n";
    meta << "projector_bias=" << (projector.has_bias() ? 1 : 0) << "\n";
    meta << "epochs=" << cfg.epochs << "\n";
    meta << "batch=" << cfg.batch << "\n";
    meta << "lr=" << cfg.lr << "\n";
    meta << "momentum=" << cfg.momentum << "\n";
    meta << "seed=" << cfg.seed << "\n";
}

PackModel PackModel::load(const std::string& path) {
    auto tensors = read_tensor_map(path);
    auto need = [&](const std::string& name) -> Matrix {
        auto it = tensors.find(name);
        if (it == tensors.end())
            throw FormatError("model container missing tensor: " + name);
        return to_matrix(it->second);
    };
    PackModel model;
    model.projector.weight = need("projector.weight");
    if (tensors.count("projector.bias"))
        model.projector.bias = need("projector.bias").row(0).transpose();
    model.decoder.w1 = need("decoder.w1");
    model.decoder.b1 = need("decoder.b1").row(0).transpose();
    if (tensors.count("decoder.w2")) {
        model.decoder.kind = DecoderKind::kMlp;
        model.decoder.w2 = need("decoder.w2");
        model.decoder.b2 = need("decoder.b2").row(0).transpose();
    } else {
        model.decoder.kind = DecoderKind::kLinear;
    }
    model.cfg.decoder = model.decoder.kind;
    if (model.decoder.in_dim() != model.projector.out_dim())
        throw FormatError("model container has inconsistent projector/decoder dims");
    return model;
}

}  // namespace repack
