#include "repack/toydiff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "repack/metrics.hpp"
#include "repack/tensor_io.hpp"

namespace repack {

namespace {

Matrix seeded_uniform(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                      double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

Matrix standard_normal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

std::vector<Eigen::Index> layer_dims(Eigen::Index latent_dim, Eigen::Index emb_width,
                                     const std::vector<std::size_t>& hidden) {
    std::vector<Eigen::Index> dims;
    dims.push_back(latent_dim + emb_width);
    for (auto h : hidden) dims.push_back(static_cast<Eigen::Index>(h));
    dims.push_back(latent_dim);
    return dims;
}

std::size_t mlp_param_count(Eigen::Index latent_dim, Eigen::Index emb_width,
                            const std::vector<std::size_t>& hidden) {
    const auto dims = layer_dims(latent_dim, emb_width, hidden);
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        n += static_cast<std::size_t>(dims[l] * dims[l + 1] + dims[l + 1]);
    return n;
}

struct StandardizedData {
    Matrix rows;
    Vector mean;
    Vector std;
};

StandardizedData standardize(const Matrix& data) {
    StandardizedData s;
    s.mean = data.colwise().mean();
    Matrix centered = data.rowwise() - s.mean.transpose();
    s.std = (centered.array().square().colwise().sum() /
             std::max<double>(1.0, static_cast<double>(data.rows() - 1)))
                .sqrt()
                .matrix()
                .transpose();
    for (Eigen::Index j = 0; j < s.std.size(); ++j)
        if (s.std(j) == 0.0) s.std(j) = 1.0;  // constant channel stays at zero
    s.rows = centered.array().rowwise() / s.std.transpose().array();
    return s;
}

}  // namespace

DiffusionSchedule make_schedule(std::size_t steps, double beta_start, double beta_end) {
    if (steps < 1) throw ValidationError("schedule needs at least 1 step");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw ValidationError("schedule requires 0 < beta_start <= beta_end < 1");
    DiffusionSchedule s;
    s.beta.resize(static_cast<Eigen::Index>(steps));
    s.alpha_bar.resize(static_cast<Eigen::Index>(steps));
    double prod = 1.0;
    for (std::size_t t = 0; t < steps; ++t) {
        const double frac = steps == 1 ? 0.0
                                       : static_cast<double>(t) / static_cast<double>(steps - 1);
        const double beta = beta_start + (beta_end - beta_start) * frac;
        prod *= 1.0 - beta;
        s.beta(static_cast<Eigen::Index>(t)) = beta;
        s.alpha_bar(static_cast<Eigen::Index>(t)) = prod;
    }
    return s;
}

Matrix forward_noise(const Matrix& z0, std::size_t t, const Matrix& noise,
                     const DiffusionSchedule& sched) {
    if (t >= sched.steps())
        throw RangeError("timestep " + std::to_string(t) + " out of range [0, " +
                         std::to_string(sched.steps()) + ")");
    if (z0.rows() != noise.rows() || z0.cols() != noise.cols())
        throw ShapeError("forward_noise: noise dims must match z0");
    const double ab = sched.alpha_bar(static_cast<Eigen::Index>(t));
    return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * noise;
}

Matrix time_embedding(const std::vector<std::size_t>& t, Eigen::Index emb_width) {
    if (emb_width < 2 || emb_width % 2 != 0)
        throw ValidationError("time embedding width must be even and >= 2");
    const Eigen::Index half = emb_width / 2;
    Matrix emb(static_cast<Eigen::Index>(t.size()), emb_width);
    for (Eigen::Index k = 0; k < half; ++k) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) /
                                     static_cast<double>(half));
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double phase = static_cast<double>(t[i]) * freq;
            emb(static_cast<Eigen::Index>(i), 2 * k) = std::sin(phase);
            emb(static_cast<Eigen::Index>(i), 2 * k + 1) = std::cos(phase);
        }
    }
    return emb;
}

Denoiser make_denoiser(Eigen::Index latent_dim, Eigen::Index emb_width,
                       const std::vector<std::size_t>& hidden, std::mt19937_64& rng) {
    if (latent_dim < 1) throw ValidationError("latent_dim must be positive");
    Denoiser net;
    net.latent_dim = latent_dim;
    net.emb_width = emb_width;
    const auto dims = layer_dims(latent_dim, emb_width, hidden);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        net.weights.push_back(seeded_uniform(rng, dims[l + 1], dims[l], bound));
        net.biases.push_back(Vector::Zero(dims[l + 1]));
    }
    return net;
}

Denoiser make_zero_denoiser(Eigen::Index latent_dim, Eigen::Index emb_width,
                            const std::vector<std::size_t>& hidden) {
    Denoiser net;
    net.latent_dim = latent_dim;
    net.emb_width = emb_width;
    const auto dims = layer_dims(latent_dim, emb_width, hidden);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        net.weights.push_back(Matrix::Zero(dims[l + 1], dims[l]));
        net.biases.push_back(Vector::Zero(dims[l + 1]));
    }
    return net;
}

Matrix Denoiser::forward(const Matrix& z_t, const std::vector<std::size_t>& t) const {
    if (z_t.cols() != latent_dim)
        throw ShapeError("denoiser expects " + std::to_string(latent_dim) + " columns");
    if (static_cast<Eigen::Index>(t.size()) != z_t.rows())
        throw ShapeError("denoiser: one timestep per row required");
    Matrix a(z_t.rows(), latent_dim + emb_width);
    a << z_t, time_embedding(t, emb_width);
    for (std::size_t l = 0; l < weights.size(); ++l) {
        a = (a * weights[l].transpose()).rowwise() + biases[l].transpose();
        if (l + 1 < weights.size()) a = a.array().tanh().matrix();
    }
    return a;
}

std::vector<double*> Denoiser::parameter_refs() {
    std::vector<double*> refs;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (Eigen::Index i = 0; i < weights[l].size(); ++i)
            refs.push_back(weights[l].data() + i);
        for (Eigen::Index i = 0; i < biases[l].size(); ++i)
            refs.push_back(biases[l].data() + i);
    }
    return refs;
}

std::size_t Denoiser::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    return n;
}

NoiseDraws draw_noise(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index dim,
                      std::size_t steps) {
    NoiseDraws d;
    std::uniform_int_distribution<std::size_t> pick_t(0, steps - 1);
    d.t.resize(static_cast<std::size_t>(rows));
    for (auto& v : d.t) v = pick_t(rng);
    d.eps = standard_normal(rng, rows, dim);
    return d;
}

namespace {

Matrix noisy_batch(const Matrix& z0, const NoiseDraws& draws, const DiffusionSchedule& sched) {
    Matrix z_t(z0.rows(), z0.cols());
    for (Eigen::Index i = 0; i < z0.rows(); ++i) {
        const double ab = sched.alpha_bar(static_cast<Eigen::Index>(draws.t[i]));
        z_t.row(i) = std::sqrt(ab) * z0.row(i) + std::sqrt(1.0 - ab) * draws.eps.row(i);
    }
    return z_t;
}

}  // namespace

double diffusion_loss(const Denoiser& net, const Matrix& z0, const NoiseDraws& draws,
                      const DiffusionSchedule& sched) {
    const Matrix pred = net.forward(noisy_batch(z0, draws, sched), draws.t);
    const double loss = (pred - draws.eps).squaredNorm() / static_cast<double>(pred.size());
    if (!std::isfinite(loss)) throw DivergenceError("non-finite diffusion loss", 0);
    return loss;
}

double diffusion_loss(const Denoiser& net, const Matrix& z0, const DiffusionSchedule& sched,
                      std::mt19937_64& rng) {
    if (z0.rows() == 0) throw ValidationError("diffusion_loss: empty batch");
    return diffusion_loss(net, z0, draw_noise(rng, z0.rows(), z0.cols(), sched.steps()), sched);
}

double diffusion_loss_and_grad(const Denoiser& net, const Matrix& z0, const NoiseDraws& draws,
                               const DiffusionSchedule& sched, std::vector<double>& grad) {
    const std::size_t layers = net.weights.size();
    std::vector<Matrix> act(layers + 1);
    act[0].resize(z0.rows(), net.latent_dim + net.emb_width);
    act[0] << noisy_batch(z0, draws, sched), time_embedding(draws.t, net.emb_width);
    for (std::size_t l = 0; l < layers; ++l) {
        act[l + 1] = (act[l] * net.weights[l].transpose()).rowwise() +
                     net.biases[l].transpose();
        if (l + 1 < layers) act[l + 1] = act[l + 1].array().tanh().matrix();
    }
    const Matrix& pred = act[layers];
    const double loss = (pred - draws.eps).squaredNorm() / static_cast<double>(pred.size());
    if (!std::isfinite(loss)) throw DivergenceError("non-finite diffusion loss", 0);

    std::vector<Matrix> g_w(layers);
    std::vector<Vector> g_b(layers);
    Matrix delta = 2.0 / static_cast<double>(pred.size()) * (pred - draws.eps);
    for (std::size_t l = layers; l-- > 0;) {
        g_w[l] = delta.transpose() * act[l];
        g_b[l] = delta.colwise().sum();
        if (l > 0) {
            delta = delta * net.weights[l];
            delta = delta.cwiseProduct((1.0 - act[l].array().square()).matrix());
        }
    }
    grad.clear();
    grad.reserve(net.parameter_count());
    for (std::size_t l = 0; l < layers; ++l) {
        grad.insert(grad.end(), g_w[l].data(), g_w[l].data() + g_w[l].size());
        grad.insert(grad.end(), g_b[l].data(), g_b[l].data() + g_b[l].size());
    }
    return loss;
}

double grad_check(Denoiser& net, const Matrix& z0, const NoiseDraws& draws,
                  const DiffusionSchedule& sched) {
    std::vector<double> analytic;
    diffusion_loss_and_grad(net, z0, draws, sched, analytic);
    return max_relative_gradient_error(
        net.parameter_refs(), analytic,
        [&]() { return diffusion_loss(net, z0, draws, sched); });
}

namespace {

// Shared training loop; the callback fires at step 0, after every
// checkpoint interval, and at the final step.
template <typename Callback>
DiffusionTrainResult train_core(const Matrix& data, const DiffusionSchedule& sched,
                                const DiffusionTrainConfig& cfg,
                                std::size_t checkpoint_every, Callback&& checkpoint) {
    if (data.rows() < 2) throw ValidationError("train_diffusion needs at least 2 rows");
    if (cfg.batch == 0) throw ValidationError("train_diffusion: batch must be positive");

    DiffusionTrainResult res;
    StandardizedData std_data = standardize(data);
    res.model.sched = sched;
    res.model.data_mean = std_data.mean;
    res.model.data_std = std_data.std;

    std::mt19937_64 rng(cfg.seed);
    Denoiser& net = res.model.net;
    net = make_denoiser(data.cols(), static_cast<Eigen::Index>(cfg.emb_width), cfg.hidden, rng);

    // Fixed probe batch and draws: the loss curve is the objective
    // re-evaluated on the same draws, so it moves only when weights do.
    const Eigen::Index probe_rows = std::min<Eigen::Index>(data.rows(), 512);
    const Matrix probe = std_data.rows.topRows(probe_rows);
    std::mt19937_64 probe_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    const NoiseDraws probe_draws = draw_noise(probe_rng, probe_rows, data.cols(), sched.steps());
    const auto probe_loss = [&]() { return diffusion_loss(net, probe, probe_draws, sched); };

    std::vector<double*> params = net.parameter_refs();
    std::vector<double> velocity(params.size(), 0.0);
    std::vector<double> grad;
    std::uniform_int_distribution<Eigen::Index> pick_row(0, data.rows() - 1);

    res.loss_curve.push_back(probe_loss());
    checkpoint(std::size_t{0}, res.model, res.loss_curve.back());

    const auto batch = static_cast<Eigen::Index>(cfg.batch);
    Matrix z0(batch, data.cols());
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        for (Eigen::Index i = 0; i < batch; ++i)
            z0.row(i) = std_data.rows.row(pick_row(rng));
        const NoiseDraws draws = draw_noise(rng, batch, data.cols(), sched.steps());
        double loss;
        try {
            loss = diffusion_loss_and_grad(net, z0, draws, sched, grad);
        } catch (const DivergenceError&) {
            throw DivergenceError("non-finite training loss", step);
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            velocity[i] = cfg.momentum * velocity[i] - cfg.lr * grad[i];
            *params[i] += velocity[i];
        }
        const bool log_now = cfg.log_every > 0 && step % cfg.log_every == 0;
        const bool check_now =
            (checkpoint_every > 0 && step % checkpoint_every == 0) || step == cfg.steps;
        if (log_now || check_now) {
            const double pl = probe_loss();
            if (log_now || step == cfg.steps) res.loss_curve.push_back(pl);
            if (check_now) checkpoint(step, res.model, pl);
        }
    }
    return res;
}

}  // namespace

DiffusionTrainResult train_diffusion(const Matrix& data, const DiffusionSchedule& sched,
                                     const DiffusionTrainConfig& cfg) {
    return train_core(data, sched, cfg, 0,
                      [](std::size_t, const DiffusionModel&, double) {});
}

Matrix sample(const DiffusionModel& model, std::size_t n, std::uint64_t seed) {
    const Eigen::Index d = model.net.latent_dim;
    if (n == 0) return Matrix(0, d);
    const std::size_t total = model.sched.steps();
    std::mt19937_64 rng(seed);
    Matrix x = standard_normal(rng, static_cast<Eigen::Index>(n), d);
    std::vector<std::size_t> t_vec(n);
    for (std::size_t t = total; t-- > 0;) {
        std::fill(t_vec.begin(), t_vec.end(), t);
        const Matrix eps_hat = model.net.forward(x, t_vec);
        const auto ti = static_cast<Eigen::Index>(t);
        const double beta = model.sched.beta(ti);
        const double ab = model.sched.alpha_bar(ti);
        x = (x - beta / std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(1.0 - beta);
        if (t > 0) {
            const double ab_prev = model.sched.alpha_bar(ti - 1);
            const double var = beta * (1.0 - ab_prev) / (1.0 - ab);
            x += std::sqrt(var) * standard_normal(rng, static_cast<Eigen::Index>(n), d);
        }
    }
    // de-standardize with the recorded training stats
    x = x.array().rowwise() * model.data_std.transpose().array();
    x.rowwise() += model.data_mean.transpose();
    return x;
}

void DiffusionModel::save(const std::string& path) const {
    std::map<std::string, FeatureTensor> tensors;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        tensors["net.w" + std::to_string(l)] = from_matrix(net.weights[l]);
        tensors["net.b" + std::to_string(l)] =
            from_matrix(Matrix(net.biases[l].transpose()));
    }
    tensors["stats.mean"] = from_matrix(Matrix(data_mean.transpose()));
    tensors["stats.std"] = from_matrix(Matrix(data_std.transpose()));
    tensors["sched.beta"] = from_matrix(Matrix(sched.beta.transpose()));
    write_tensor_map(tensors, path);

    std::ofstream meta(path + ".meta", std::ios::trunc);
    if (!meta) throw IoError("cannot write sidecar: " + path + ".meta");
    meta << "# repack diffusion model config\n";
    meta << "latent_dim=" << net.latent_dim << "\n";
    meta << "emb_width=" << net.emb_width << "\n";
    meta << "layers=" << net.weights.size() << "\n";
    meta << "T=" << sched.steps() << "\n";
}

DiffusionModel DiffusionModel::load(const std::string& path) {
    auto tensors = read_tensor_map(path);
    auto need = [&](const std::string& name) -> Matrix {
        auto it = tensors.find(name);
        if (it == tensors.end())
            throw FormatError("model container missing tensor: " + name);
        return to_matrix(it->second);
    };
    DiffusionModel model;
    for (std::size_t l = 0;; ++l) {
        const std::string wname = "net.w" + std::to_string(l);
        if (!tensors.count(wname)) break;
        model.net.weights.push_back(need(wname));
        model.net.biases.push_back(need("net.b" + std::to_string(l)).row(0).transpose());
    }
    if (model.net.weights.empty()) throw FormatError("model container has no layers");
    model.data_mean = need("stats.mean").row(0).transpose();
    model.data_std = need("stats.std").row(0).transpose();
    model.net.latent_dim = model.net.weights.back().rows();
    model.net.emb_width = model.net.weights.front().cols() - model.net.latent_dim;
    if (model.net.emb_width < 0)
        throw FormatError("model container has inconsistent layer dims");

    const Vector beta = need("sched.beta").row(0).transpose();
    model.sched.beta = beta;
    model.sched.alpha_bar.resize(beta.size());
    double prod = 1.0;
    for (Eigen::Index t = 0; t < beta.size(); ++t) {
        prod *= 1.0 - beta(t);
        model.sched.alpha_bar(t) = prod;
    }
    return model;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Smallest width whose two-hidden-layer net matches the target count best.
std::size_t match_hidden_width(Eigen::Index latent_dim, Eigen::Index emb_width,
                               std::size_t target) {
    std::size_t best_w = 1;
    std::size_t best_diff = static_cast<std::size_t>(-1);
    for (std::size_t w = 1; w <= 4096; ++w) {
        const std::size_t count = mlp_param_count(latent_dim, emb_width, {w, w});
        const std::size_t diff = count > target ? count - target : target - count;
        if (diff < best_diff) {
            best_diff = diff;
            best_w = w;
        }
        if (count > 2 * target) break;
    }
    return best_w;
}

}  // namespace

ConvergenceReport convergence_experiment(const Matrix& raw, const Matrix& packed,
                                         const PackModel& pack, const Matrix& basis,
                                         const CompareConfig& cfg) {
    if (raw.rows() != packed.rows())
        throw ValidationError("raw and packed datasets have different row counts; "
                              "they must come from the same source");
    if (pack.projector.in_dim() != raw.cols() || pack.projector.out_dim() != packed.cols())
        throw ValidationError("pack model dims do not match the datasets");
    if (basis.rows() != raw.cols())
        throw ShapeError("ground-truth basis rows must equal the raw feature dimension");
    if (cfg.seeds.empty()) throw ValidationError("need at least one seed");

    const Eigen::Index m = raw.rows();
    const auto holdout = std::max<Eigen::Index>(
        2, static_cast<Eigen::Index>(cfg.holdout_fraction * static_cast<double>(m)));
    if (holdout >= m) throw ValidationError("holdout fraction leaves no training rows");
    const Eigen::Index train_n = m - holdout;

    const Matrix train_raw = raw.topRows(train_n);
    const Matrix train_packed = packed.topRows(train_n);
    const GaussianStats reference = gaussian_stats(Matrix(raw.bottomRows(holdout) * basis));

    ConvergenceReport report;
    const auto emb = static_cast<Eigen::Index>(cfg.emb_width);
    report.raw_params = mlp_param_count(raw.cols(), emb, {cfg.raw_hidden, cfg.raw_hidden});
    report.packed_hidden = match_hidden_width(packed.cols(), emb, report.raw_params);
    report.packed_params =
        mlp_param_count(packed.cols(), emb, {report.packed_hidden, report.packed_hidden});
    const double mismatch =
        std::abs(static_cast<double>(report.packed_params) -
                 static_cast<double>(report.raw_params)) /
        static_cast<double>(report.raw_params);
    if (mismatch > 0.05)
        throw ValidationError("could not match denoiser parameter counts within 5%");

    const DiffusionSchedule sched =
        make_schedule(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end);

    struct RunSpec {
        bool is_packed;
        std::uint64_t seed;
    };
    std::vector<RunSpec> specs;
    for (auto seed : cfg.seeds) specs.push_back({false, seed});
    for (auto seed : cfg.seeds) specs.push_back({true, seed});

    std::vector<std::vector<CheckpointRecord>> run_records(specs.size());

    auto execute = [&](std::size_t idx) {
        const RunSpec& spec = specs[idx];
        const Matrix& data = spec.is_packed ? train_packed : train_raw;
        DiffusionTrainConfig tcfg;
        tcfg.steps = cfg.budget;
        tcfg.batch = cfg.batch;
        tcfg.lr = cfg.lr;
        tcfg.momentum = cfg.momentum;
        tcfg.seed = spec.seed;
        tcfg.emb_width = cfg.emb_width;
        tcfg.log_every = 0;
        tcfg.hidden = spec.is_packed
                          ? std::vector<std::size_t>{report.packed_hidden, report.packed_hidden}
                          : std::vector<std::size_t>{cfg.raw_hidden, cfg.raw_hidden};

        auto& records = run_records[idx];
        auto on_checkpoint = [&](std::size_t step, const DiffusionModel& model,
                                 double probe_loss) {
            const Matrix samples =
                sample(model, cfg.eval_samples, spec.seed * 1000003ull + step);
            // shared ground-truth coordinates: packed samples are decoded
            // through the pack model first, raw samples project directly
            const Matrix coords = spec.is_packed
                                      ? Matrix(pack.decoder.apply(samples) * basis)
                                      : Matrix(samples * basis);
            CheckpointRecord rec;
            rec.representation = spec.is_packed ? "packed" : "raw";
            rec.seed = spec.seed;
            rec.step = step;
            rec.train_loss = probe_loss;
            rec.frechet = frechet_distance(gaussian_stats(coords), reference);
            records.push_back(rec);
        };
        train_core(data, sched, tcfg, cfg.checkpoint_every, on_checkpoint);
    };

    const unsigned threads = std::max(1u, cfg.threads);
    if (threads <= 1) {
        for (std::size_t i = 0; i < specs.size(); ++i) execute(i);
    } else {
        std::vector<std::thread> pool;
        const unsigned workers = std::min<unsigned>(threads, specs.size());
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w]() {
                for (std::size_t i = w; i < specs.size(); i += workers) execute(i);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<double> steps_raw, steps_packed;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& records = run_records[i];
        report.records.insert(report.records.end(), records.begin(), records.end());
        double floor = records.front().frechet;
        for (const auto& r : records) floor = std::min(floor, r.frechet);
        RunSummary summary;
        summary.representation = specs[i].is_packed ? "packed" : "raw";
        summary.seed = specs[i].seed;
        summary.frechet_floor = floor;
        summary.steps_to_threshold = records.back().step;
        for (const auto& r : records)
            if (r.frechet <= 1.5 * floor) {
                summary.steps_to_threshold = r.step;
                break;
            }
        (specs[i].is_packed ? steps_packed : steps_raw)
            .push_back(static_cast<double>(summary.steps_to_threshold));
        report.runs.push_back(summary);
    }
    report.median_steps_raw = median(steps_raw);
    report.median_steps_packed = median(steps_packed);
    return report;
}

}  // namespace repack
