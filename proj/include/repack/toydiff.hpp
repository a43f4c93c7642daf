#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "repack/pack.hpp"
#include "repack/tensor.hpp"

namespace repack {

// Variance-preserving forward process with a linear beta schedule.
struct DiffusionSchedule {
    Vector beta;       // per-step, in (0,1)
    Vector alpha_bar;  // cumulative product of (1 - beta), strictly decreasing

    std::size_t steps() const { return static_cast<std::size_t>(beta.size()); }
};

DiffusionSchedule make_schedule(std::size_t steps, double beta_start, double beta_end);

// z_t = sqrt(alpha_bar[t]) * z0 + sqrt(1 - alpha_bar[t]) * noise
Matrix forward_noise(const Matrix& z0, std::size_t t, const Matrix& noise,
                     const DiffusionSchedule& sched);

// Epsilon-prediction MLP over (latent, sinusoidal time embedding), tanh
// hidden layers, linear output of the latent width.
struct Denoiser {
    Eigen::Index latent_dim = 0;
    Eigen::Index emb_width = 0;
    std::vector<Matrix> weights;  // layer l: out_l x in_l
    std::vector<Vector> biases;

    Matrix forward(const Matrix& z_t, const std::vector<std::size_t>& t) const;
    std::vector<double*> parameter_refs();
    std::size_t parameter_count() const;
};

Denoiser make_denoiser(Eigen::Index latent_dim, Eigen::Index emb_width,
                       const std::vector<std::size_t>& hidden, std::mt19937_64& rng);

// Zero-initialized variant; predicts zero noise everywhere (the
// calibration baseline with expected loss 1.0 on standardized data).
Denoiser make_zero_denoiser(Eigen::Index latent_dim, Eigen::Index emb_width,
                            const std::vector<std::size_t>& hidden);

Matrix time_embedding(const std::vector<std::size_t>& t, Eigen::Index emb_width);

// Per-row timestep and noise draws, separated out so losses and gradient
// checks can re-evaluate the exact same stochastic objective.
struct NoiseDraws {
    std::vector<std::size_t> t;
    Matrix eps;
};

NoiseDraws draw_noise(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index dim,
                      std::size_t steps);

// Mean over batch and dims of (eps_hat - eps)^2.
double diffusion_loss(const Denoiser& net, const Matrix& z0, const DiffusionSchedule& sched,
                      std::mt19937_64& rng);
double diffusion_loss(const Denoiser& net, const Matrix& z0, const NoiseDraws& draws,
                      const DiffusionSchedule& sched);
double diffusion_loss_and_grad(const Denoiser& net, const Matrix& z0, const NoiseDraws& draws,
                               const DiffusionSchedule& sched, std::vector<double>& grad);

double grad_check(Denoiser& net, const Matrix& z0, const NoiseDraws& draws,
                  const DiffusionSchedule& sched);

struct DiffusionTrainConfig {
    std::size_t steps = 2000;
    std::size_t batch = 128;
    double lr = 0.02;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t emb_width = 16;
    std::size_t log_every = 100;
};

// Trained denoiser plus the per-channel standardization recorded from the
// training data; sampling de-standardizes with these stats.
struct DiffusionModel {
    Denoiser net;
    DiffusionSchedule sched;
    Vector data_mean;
    Vector data_std;

    void save(const std::string& path) const;
    static DiffusionModel load(const std::string& path);
};

struct DiffusionTrainResult {
    DiffusionModel model;
    std::vector<double> loss_curve;  // mean training loss per logging interval
};

DiffusionTrainResult train_diffusion(const Matrix& data, const DiffusionSchedule& sched,
                                     const DiffusionTrainConfig& cfg);

// Ancestral reverse process from a standard-normal start, de-standardized
// with the recorded stats; bit-deterministic per seed.
Matrix sample(const DiffusionModel& model, std::size_t n, std::uint64_t seed);

// One training run per representation per seed, Frechet tracked against
// held-out data in the shared ground-truth coordinate space.
struct CompareConfig {
    std::size_t budget = 2000;
    std::size_t checkpoint_every = 500;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::size_t batch = 128;
    double lr = 0.02;
    double momentum = 0.9;
    std::size_t raw_hidden = 64;  // per-layer width of the raw-side net
    std::size_t emb_width = 16;
    std::size_t eval_samples = 512;
    double holdout_fraction = 0.25;
    std::size_t diffusion_steps = 100;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    unsigned threads = 1;
};

struct CheckpointRecord {
    std::string representation;  // "raw" or "packed"
    std::uint64_t seed = 0;
    std::size_t step = 0;
    double train_loss = 0.0;  // objective on a fixed probe batch
    double frechet = 0.0;
};

struct RunSummary {
    std::string representation;
    std::uint64_t seed = 0;
    double frechet_floor = 0.0;
    std::size_t steps_to_threshold = 0;  // first checkpoint with frechet <= 1.5*floor
};

struct ConvergenceReport {
    std::vector<CheckpointRecord> records;
    std::vector<RunSummary> runs;
    std::size_t raw_params = 0;
    std::size_t packed_params = 0;
    std::size_t packed_hidden = 0;  // width chosen to match parameter counts
    double median_steps_raw = 0.0;
    double median_steps_packed = 0.0;
};

ConvergenceReport convergence_experiment(const Matrix& raw, const Matrix& packed,
                                         const PackModel& pack, const Matrix& basis,
                                         const CompareConfig& cfg);

}  // namespace repack
