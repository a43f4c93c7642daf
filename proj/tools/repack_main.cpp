#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "repack/freqband.hpp"
#include "repack/manifest.hpp"
#include "repack/metrics.hpp"
#include "repack/pipeline.hpp"
#include "repack/synthetic.hpp"
#include "repack/tensor_io.hpp"
#include "repack/toydiff.hpp"

namespace {

using namespace repack;

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += " ";
        s += argv[i];
    }
    return s;
}

unsigned env_threads() {
    const char* v = std::getenv("REPACK_THREADS");
    if (!v) return 1;
    const long n = std::strtol(v, nullptr, 10);
    return n > 0 ? static_cast<unsigned>(n) : 1;
}

std::string fmt_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_kv_csv(const std::string& path, const std::vector<std::pair<std::string, double>>& kv) {
    const bool fresh = !std::ifstream(path).good();
    std::ofstream f(path, std::ios::app);
    if (!f) throw IoError("cannot open for writing: " + path);
    if (fresh) f << "key,value\n";
    for (const auto& [k, v] : kv) f << k << "," << fmt_value(v) << "\n";
}

struct ManifestScope {
    RunManifest manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit ManifestScope(std::string command) { manifest.command = std::move(command); }

    void finish() {
        manifest.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.write_beside_outputs();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"repack: feature packing laboratory"};
    app.require_subcommand(1);
    const std::string command_line = join_args(argc, argv);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate synthetic features with a known manifold");
    SyntheticSpec gspec;
    std::size_t gen_rows = 4096;
    std::string gen_out;
    gen->add_option("--dim", gspec.embed_dim, "feature dimension D")->required();
    gen->add_option("--intrinsic", gspec.intrinsic_dim, "intrinsic dimension")->required();
    gen->add_option("--noise", gspec.noise_radius, "off-manifold noise radius");
    gen->add_option("--clusters", gspec.cluster_count, "mixture components");
    gen->add_option("--rows", gen_rows, "number of feature rows");
    gen->add_option("--seed", gspec.seed, "rng seed");
    gen->add_option("--out", gen_out, "output features (.rpk)")->required();
    gen->callback([&]() {
        ManifestScope scope(command_line);
        const SyntheticData data = gen_synthetic_features(gspec, gen_rows);
        write_tensor(data.features, gen_out);
        const std::string basis_out = gen_out + ".basis";
        write_tensor(data.basis, basis_out);
        scope.manifest.seeds = {gspec.seed};
        scope.manifest.outputs = {gen_out, basis_out};
        scope.finish();
        std::cout << "rows=" << gen_rows << " dim=" << gspec.embed_dim
                  << " basis=" << basis_out << "\n";
    });

    // ---- spectrum ----
    auto* spectrum_cmd = app.add_subcommand("spectrum", "PCA spectrum of a feature matrix");
    std::string spec_in, spec_out;
    spectrum_cmd->add_option("--in", spec_in, "input features (.rpk, rank-2)")->required();
    spectrum_cmd->add_option("--out", spec_out, "output csv")->required();
    spectrum_cmd->callback([&]() {
        ManifestScope scope(command_line);
        const PcaResult pca = pca_spectrum(read_tensor(spec_in));
        write_spectrum_csv(pca, spec_out);
        if (pca.report.elbow_index)
            std::cout << "elbow=" << *pca.report.elbow_index << "\n";
        else
            std::cout << "elbow=none\n";
        std::cout << "effective_rank=" << fmt_value(pca.report.effective_rank) << "\n";
        scope.manifest.inputs = {spec_in};
        scope.manifest.outputs = {spec_out};
        scope.finish();
    });

    // ---- pack fit / apply ----
    auto* pack_cmd = app.add_subcommand("pack", "linear bottleneck training and application");
    pack_cmd->require_subcommand(1);
    auto* fit = pack_cmd->add_subcommand("fit", "train projector + decoder");
    std::string fit_in, fit_out, fit_decoder = "linear", fit_objective = "l1";
    Eigen::Index fit_d = 32;
    TrainConfig fit_cfg;
    fit->add_option("--in", fit_in, "input features (.rpk)")->required();
    fit->add_option("--d", fit_d, "bottleneck width")->required();
    fit->add_option("--decoder", fit_decoder, "linear|mlp");
    fit->add_option("--objective", fit_objective, "l1|l2");
    fit->add_option("--epochs", fit_cfg.epochs, "training epochs");
    fit->add_option("--batch", fit_cfg.batch, "batch size");
    fit->add_option("--lr", fit_cfg.lr, "learning rate");
    fit->add_option("--momentum", fit_cfg.momentum, "momentum");
    fit->add_option("--seed", fit_cfg.seed, "rng seed");
    fit->add_option("--hidden", fit_cfg.hidden, "mlp hidden width");
    fit->add_flag("--bias", fit_cfg.projector_bias,
                  "add a projector bias ((D+1)*d parameter variant)");
    fit->add_option("--out", fit_out, "output model (.rpkm)")->required();
    fit->callback([&]() {
        ManifestScope scope(command_line);
        if (fit_decoder != "linear" && fit_decoder != "mlp")
            throw ValidationError("--decoder must be linear or mlp");
        if (fit_objective != "l1" && fit_objective != "l2")
            throw ValidationError("--objective must be l1 or l2");
        fit_cfg.decoder = fit_decoder == "mlp" ? DecoderKind::kMlp : DecoderKind::kLinear;
        fit_cfg.objective = fit_objective == "l1" ? Objective::kL1 : Objective::kL2;
        const Matrix rows = to_matrix(read_tensor(fit_in));
        const TrainResult res = train_pack(rows, fit_d, fit_cfg);
        res.model.save(fit_out);
        scope.manifest.seeds = {fit_cfg.seed};
        scope.manifest.inputs = {fit_in};
        scope.manifest.outputs = {fit_out};
        scope.finish();
        std::cout << "final_loss=" << fmt_value(res.loss_curve.back()) << "\n";
    });

    auto* apply = pack_cmd->add_subcommand("apply", "project features through a model");
    std::string apply_model, apply_in, apply_out;
    apply->add_option("--model", apply_model, "model (.rpkm)")->required();
    apply->add_option("--in", apply_in, "input features (.rpk)")->required();
    apply->add_option("--out", apply_out, "packed output (.rpk)")->required();
    apply->callback([&]() {
        ManifestScope scope(command_line);
        const PackModel model = PackModel::load(apply_model);
        const Matrix packed = model.project(to_matrix(read_tensor(apply_in)));
        write_tensor(from_matrix(packed), apply_out);
        scope.manifest.inputs = {apply_model, apply_in};
        scope.manifest.outputs = {apply_out};
        scope.finish();
    });

    // ---- freq ----
    auto* freq = app.add_subcommand("freq", "radial low/high frequency split of a latent");
    std::string freq_in, freq_low, freq_high, freq_profile;
    double freq_radius = 0.25;
    freq->add_option("--in", freq_in, "input latent (.rpk, rank-3 h,w,c)")->required();
    freq->add_option("--radius", freq_radius, "normalized mask radius in [0,1]");
    freq->add_option("--out-low", freq_low, "low band output (.rpk)");
    freq->add_option("--out-high", freq_high, "high band output (.rpk)");
    freq->add_option("--profile", freq_profile, "cumulative energy profile csv");
    freq->callback([&]() {
        ManifestScope scope(command_line);
        const FeatureTensor latent = read_tensor(freq_in);
        scope.manifest.inputs = {freq_in};
        if (!freq_low.empty() || !freq_high.empty()) {
            const BandSplit split = band_split(latent, freq_radius);
            if (!freq_low.empty()) {
                write_tensor(split.z_low, freq_low);
                scope.manifest.outputs.push_back(freq_low);
            }
            if (!freq_high.empty()) {
                write_tensor(split.z_high, freq_high);
                scope.manifest.outputs.push_back(freq_high);
            }
            std::cout << "energy_low=" << fmt_value(split.energy_low)
                      << " energy_high=" << fmt_value(split.energy_high) << "\n";
        }
        if (!freq_profile.empty()) {
            std::vector<double> radii;
            for (int i = 0; i <= 20; ++i) radii.push_back(i / 20.0);
            const auto profile = band_energy_profile(latent, radii);
            std::ofstream f(freq_profile, std::ios::trunc);
            if (!f) throw IoError("cannot open for writing: " + freq_profile);
            f << "radius,energy_low_fraction\n";
            for (const auto& [r, frac] : profile)
                f << fmt_value(r) << "," << fmt_value(frac) << "\n";
            scope.manifest.outputs.push_back(freq_profile);
        }
        scope.finish();
    });

    // ---- diffuse train / sample / compare ----
    auto* diffuse = app.add_subcommand("diffuse", "toy denoising diffusion");
    diffuse->require_subcommand(1);

    auto* dtrain = diffuse->add_subcommand("train", "train a denoiser on latent rows");
    std::string dtrain_in, dtrain_out;
    DiffusionTrainConfig dcfg;
    std::size_t dtrain_T = 100;
    double dtrain_beta_start = 1e-4, dtrain_beta_end = 0.02;
    dtrain->add_option("--in", dtrain_in, "input latent rows (.rpk)")->required();
    dtrain->add_option("--steps", dcfg.steps, "training steps");
    dtrain->add_option("--batch", dcfg.batch, "batch size");
    dtrain->add_option("--lr", dcfg.lr, "learning rate");
    dtrain->add_option("--momentum", dcfg.momentum, "momentum");
    dtrain->add_option("--T", dtrain_T, "diffusion steps");
    dtrain->add_option("--beta-start", dtrain_beta_start, "schedule start");
    dtrain->add_option("--beta-end", dtrain_beta_end, "schedule end");
    dtrain->add_option("--seed", dcfg.seed, "rng seed");
    dtrain->add_option("--hidden", dcfg.hidden, "hidden widths");
    dtrain->add_option("--emb", dcfg.emb_width, "time embedding width");
    dtrain->add_option("--out", dtrain_out, "output model (.rpkm)")->required();
    dtrain->callback([&]() {
        ManifestScope scope(command_line);
        const Matrix data = to_matrix(read_tensor(dtrain_in));
        const DiffusionSchedule sched =
            make_schedule(dtrain_T, dtrain_beta_start, dtrain_beta_end);
        const DiffusionTrainResult res = train_diffusion(data, sched, dcfg);
        res.model.save(dtrain_out);
        scope.manifest.seeds = {dcfg.seed};
        scope.manifest.inputs = {dtrain_in};
        scope.manifest.outputs = {dtrain_out};
        scope.finish();
        std::cout << "final_loss=" << fmt_value(res.loss_curve.back()) << "\n";
    });

    auto* dsample = diffuse->add_subcommand("sample", "ancestral sampling from a model");
    std::string dsample_model, dsample_out;
    std::size_t dsample_n = 256;
    std::uint64_t dsample_seed = 0;
    dsample->add_option("--model", dsample_model, "model (.rpkm)")->required();
    dsample->add_option("--n", dsample_n, "sample count");
    dsample->add_option("--seed", dsample_seed, "rng seed");
    dsample->add_option("--out", dsample_out, "samples output (.rpk)")->required();
    dsample->callback([&]() {
        ManifestScope scope(command_line);
        const DiffusionModel model = DiffusionModel::load(dsample_model);
        if (dsample_n == 0) throw ValidationError("--n must be positive for file output");
        write_tensor(from_matrix(sample(model, dsample_n, dsample_seed)), dsample_out);
        scope.manifest.seeds = {dsample_seed};
        scope.manifest.inputs = {dsample_model};
        scope.manifest.outputs = {dsample_out};
        scope.finish();
    });

    auto* dcompare = diffuse->add_subcommand("compare",
                                             "raw vs packed convergence comparison");
    std::string cmp_raw, cmp_packed, cmp_model, cmp_basis, cmp_out;
    CompareConfig ccfg;
    std::size_t cmp_seed_count = 3;
    std::uint64_t cmp_seed_base = 1;
    dcompare->add_option("--raw", cmp_raw, "raw features (.rpk)")->required();
    dcompare->add_option("--packed", cmp_packed, "packed latents (.rpk)")->required();
    dcompare->add_option("--pack-model", cmp_model, "pack model (.rpkm)")->required();
    dcompare->add_option("--basis", cmp_basis, "ground-truth basis (.rpk)")->required();
    dcompare->add_option("--budget", ccfg.budget, "training steps per run");
    dcompare->add_option("--checkpoint", ccfg.checkpoint_every, "checkpoint interval");
    dcompare->add_option("--seeds", cmp_seed_count, "number of seeds");
    dcompare->add_option("--seed-base", cmp_seed_base, "first seed value");
    dcompare->add_option("--batch", ccfg.batch, "batch size");
    dcompare->add_option("--lr", ccfg.lr, "learning rate");
    dcompare->add_option("--eval", ccfg.eval_samples, "samples per checkpoint");
    dcompare->add_option("--T", ccfg.diffusion_steps, "diffusion steps");
    dcompare->add_option("--out", cmp_out, "report csv")->required();
    dcompare->callback([&]() {
        ManifestScope scope(command_line);
        ccfg.seeds.clear();
        for (std::size_t i = 0; i < cmp_seed_count; ++i)
            ccfg.seeds.push_back(cmp_seed_base + i);
        ccfg.threads = env_threads();
        const Matrix raw = to_matrix(read_tensor(cmp_raw));
        const Matrix packed = to_matrix(read_tensor(cmp_packed));
        const PackModel model = PackModel::load(cmp_model);
        const Matrix basis = to_matrix(read_tensor(cmp_basis));
        const ConvergenceReport report = convergence_experiment(raw, packed, model, basis, ccfg);
        std::ofstream f(cmp_out, std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + cmp_out);
        f << "representation,seed,checkpoint_step,train_loss,frechet\n";
        for (const auto& rec : report.records)
            f << rec.representation << "," << rec.seed << "," << rec.step << ","
              << fmt_value(rec.train_loss) << "," << fmt_value(rec.frechet) << "\n";
        std::cout << "median_steps_raw=" << report.median_steps_raw
                  << " median_steps_packed=" << report.median_steps_packed << "\n";
        scope.manifest.seeds = ccfg.seeds;
        scope.manifest.inputs = {cmp_raw, cmp_packed, cmp_model, cmp_basis};
        scope.manifest.outputs = {cmp_out};
        scope.finish();
    });

    // ---- eval frechet / psnr-ssim ----
    auto* eval = app.add_subcommand("eval", "metric evaluation");
    eval->require_subcommand(1);

    auto* efrechet = eval->add_subcommand("frechet", "Frechet distance between row sets");
    std::string ef_a, ef_b, ef_out;
    efrechet->add_option("--a", ef_a, "first row set (.rpk)")->required();
    efrechet->add_option("--b", ef_b, "second row set (.rpk)")->required();
    efrechet->add_option("--out", ef_out, "append key,value csv");
    efrechet->callback([&]() {
        ManifestScope scope(command_line);
        const double d = frechet_distance(gaussian_stats(read_tensor(ef_a)),
                                          gaussian_stats(read_tensor(ef_b)));
        std::cout << "frechet=" << fmt_value(d) << "\n";
        scope.manifest.inputs = {ef_a, ef_b};
        if (!ef_out.empty()) {
            append_kv_csv(ef_out, {{"frechet", d}});
            scope.manifest.outputs = {ef_out};
        }
        scope.finish();
    });

    auto* epsnr = eval->add_subcommand("psnr-ssim", "reconstruction quality metrics");
    std::string ep_ref, ep_rec, ep_out;
    double ep_peak = 1.0;
    epsnr->add_option("--ref", ep_ref, "reference (.rpk)")->required();
    epsnr->add_option("--rec", ep_rec, "reconstruction (.rpk)")->required();
    epsnr->add_option("--peak", ep_peak, "peak value");
    epsnr->add_option("--out", ep_out, "append key,value csv");
    epsnr->callback([&]() {
        ManifestScope scope(command_line);
        const FeatureTensor ref = read_tensor(ep_ref);
        const FeatureTensor rec = read_tensor(ep_rec);
        const double p = psnr(ref, rec, ep_peak);
        const double s = ssim(ref, rec, ep_peak);
        std::cout << "psnr=" << fmt_value(p) << "\n";
        std::cout << "ssim=" << fmt_value(s) << "\n";
        scope.manifest.inputs = {ep_ref, ep_rec};
        if (!ep_out.empty()) {
            append_kv_csv(ep_out, {{"psnr", p}, {"ssim", s}});
            scope.manifest.outputs = {ep_out};
        }
        scope.finish();
    });

    // ---- convert ----
    auto* convert = app.add_subcommand("convert", "RPK1 <-> CSV for small tensors");
    std::string conv_in, conv_out;
    convert->add_option("--in", conv_in, "input (.rpk or .csv)")->required();
    convert->add_option("--out", conv_out, "output (.csv or .rpk)")->required();
    convert->callback([&]() {
        ManifestScope scope(command_line);
        const bool in_csv = conv_in.size() > 4 && conv_in.substr(conv_in.size() - 4) == ".csv";
        const bool out_csv = conv_out.size() > 4 && conv_out.substr(conv_out.size() - 4) == ".csv";
        if (in_csv == out_csv)
            throw ValidationError("convert needs one .csv side and one .rpk side");
        if (in_csv)
            write_tensor(read_tensor_csv(conv_in), conv_out);
        else
            write_tensor_csv(read_tensor(conv_in), conv_out);
        scope.manifest.inputs = {conv_in};
        scope.manifest.outputs = {conv_out};
        scope.finish();
    });

    // ---- pipeline ----
    auto* pipeline = app.add_subcommand("pipeline", "run the full experiment from a config");
    std::string pipe_config, pipe_out;
    pipeline->add_option("--config", pipe_config, "key=value config file")->required();
    pipeline->add_option("--out", pipe_out, "report directory")->required();
    pipeline->callback([&]() {
        ManifestScope scope(command_line);
        PipelineConfig cfg = parse_pipeline_config(pipe_config);
        cfg.threads = env_threads();
        const PipelineResult res = end_to_end_pipeline(cfg, pipe_out);
        for (const auto& line : res.summary) std::cout << line << "\n";
        scope.manifest.seeds = {cfg.seed};
        scope.manifest.inputs = {pipe_config};
        scope.manifest.outputs = res.written;
        scope.finish();
        if (!res.all_pass) std::cout << "summary: at least one assertion failed\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        std::cerr << "E_USAGE: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << e.code() << ": " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "E_INTERNAL: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
