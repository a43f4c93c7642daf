#include "repack/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "repack/freqband.hpp"
#include "repack/metrics.hpp"
#include "repack/synthetic.hpp"
#include "repack/tensor_io.hpp"

namespace repack {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
    return buf;
}

std::map<std::string, std::string> read_kv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  " is not key=value: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

// cumulative explained variance at a fraction of the dimension count
double cumulative_at_fraction(const SpectrumReport& rep, double f) {
    const auto len = rep.cumulative_ratio.size();
    auto k = static_cast<Eigen::Index>(std::llround(f * static_cast<double>(len)));
    k = std::min(std::max<Eigen::Index>(k, 1), len);
    return rep.cumulative_ratio(k - 1);
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& path) {
    const auto kv = read_kv(path);
    PipelineConfig cfg;
    for (const auto& [key, value] : kv) {
        try {
            if (key == "dim") cfg.dim = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "intrinsic") cfg.intrinsic = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "clusters") cfg.clusters = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "noise") cfg.noise = std::stod(value);
            else if (key == "rows") cfg.rows = std::stoul(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "pack_d") cfg.pack_d = static_cast<Eigen::Index>(std::stol(value));
            else if (key == "pack_epochs") cfg.pack_epochs = std::stoul(value);
            else if (key == "pack_batch") cfg.pack_batch = std::stoul(value);
            else if (key == "pack_lr") cfg.pack_lr = std::stod(value);
            else if (key == "pack_objective")
                cfg.pack_objective = value == "l1" ? Objective::kL1 : Objective::kL2;
            else if (key == "freq_radius") cfg.freq_radius = std::stod(value);
            else if (key == "diffuse_budget") cfg.diffuse_budget = std::stoul(value);
            else if (key == "diffuse_checkpoint") cfg.diffuse_checkpoint = std::stoul(value);
            else if (key == "diffuse_batch") cfg.diffuse_batch = std::stoul(value);
            else if (key == "diffuse_lr") cfg.diffuse_lr = std::stod(value);
            else if (key == "diffuse_seeds") cfg.diffuse_seeds = std::stoul(value);
            else if (key == "diffuse_eval") cfg.diffuse_eval = std::stoul(value);
            else if (key == "diffusion_steps") cfg.diffusion_steps = std::stoul(value);
            else if (key == "threads") cfg.threads = static_cast<unsigned>(std::stoul(value));
            else throw ValidationError("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw ValidationError("config value for " + key + " is not a number: " + value);
        } catch (const std::out_of_range&) {
            throw ValidationError("config value for " + key + " is out of range: " + value);
        }
    }
    return cfg;
}

void write_spectrum_csv(const PcaResult& pca, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    const SpectrumReport& rep = pca.report;
    if (rep.elbow_index)
        f << "# elbow=" << *rep.elbow_index << "\n";
    else
        f << "# elbow=none\n";
    f << "# effective_rank=" << fmt(rep.effective_rank) << "\n";
    f << "index,eigenvalue,explained_ratio,cumulative_ratio\n";
    for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
        f << (i + 1) << "," << fmt(rep.eigenvalues(i)) << "," << fmt(rep.explained_ratio(i))
          << "," << fmt(rep.cumulative_ratio(i)) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

PipelineResult end_to_end_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto out = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    PipelineResult result;
    auto track = [&](const std::string& path) {
        result.written.push_back(path);
        return path;
    };

    // stage: gen
    SyntheticSpec spec;
    spec.embed_dim = cfg.dim;
    spec.intrinsic_dim = cfg.intrinsic;
    spec.noise_radius = cfg.noise;
    spec.cluster_count = cfg.clusters;
    spec.seed = cfg.seed;
    const SyntheticData data = gen_synthetic_features(spec, cfg.rows);
    write_tensor(data.features, track(out("raw.rpk")));
    write_tensor(data.basis, track(out("utrue.rpk")));
    const Matrix raw = to_matrix(data.features);
    const Matrix basis = to_matrix(data.basis);

    // stage: spectrum (raw)
    const PcaResult raw_pca = pca_spectrum(raw);
    write_spectrum_csv(raw_pca, track(out("spectrum_raw.csv")));

    // stage: pack fit/apply
    TrainConfig tcfg;
    tcfg.epochs = cfg.pack_epochs;
    tcfg.batch = cfg.pack_batch;
    tcfg.lr = cfg.pack_lr;
    tcfg.seed = cfg.seed;
    tcfg.decoder = DecoderKind::kLinear;
    tcfg.objective = cfg.pack_objective;
    const TrainResult pack_fit = train_pack(raw, cfg.pack_d, tcfg);
    pack_fit.model.save(out("model.rpkm"));
    track(out("model.rpkm"));
    const Matrix packed = pack_fit.model.project(raw);
    write_tensor(from_matrix(packed), track(out("packed.rpk")));

    const double recon_mse = reconstruction_loss_l2(pack_fit.model.reconstruct(raw), raw);
    const double pca_mse =
        reconstruction_loss_l2(pca_truncate(raw, cfg.pack_d).core, raw);
    const double gap = (recon_mse - pca_mse) / pca_mse;

    // stage: spectrum (packed)
    const PcaResult packed_pca = pca_spectrum(packed);
    write_spectrum_csv(packed_pca, track(out("spectrum_packed.csv")));

    // stage: frequency profiles on 16x16 token grids; the raw side is
    // projected to its top-3 principal channels first
    const std::uint32_t grid = 16;
    const std::size_t per_image = grid * grid;
    const std::size_t n_images = cfg.rows / per_image;
    std::vector<double> radii;
    for (int i = 0; i <= 20; ++i) radii.push_back(i / 20.0);
    auto profile_csv = [&](const Matrix& rows_mat, const std::string& path) {
        std::vector<double> acc(radii.size(), 0.0);
        for (std::size_t img = 0; img < n_images; ++img) {
            const Matrix block = rows_mat.middleRows(
                static_cast<Eigen::Index>(img * per_image), per_image);
            FeatureTensor map = from_matrix(block);
            map.dims = {grid, grid, static_cast<std::uint32_t>(block.cols())};
            const auto profile = band_energy_profile(map, radii);
            for (std::size_t i = 0; i < profile.size(); ++i) acc[i] += profile[i].second;
        }
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + path);
        f << "radius,energy_low_fraction\n";
        for (std::size_t i = 0; i < radii.size(); ++i)
            f << fmt(radii[i]) << "," << fmt(acc[i] / static_cast<double>(n_images)) << "\n";
    };
    if (n_images > 0) {
        const Matrix raw3 = (raw.rowwise() - raw_pca.mean.transpose()) *
                            raw_pca.directions.leftCols(3);
        profile_csv(raw3, track(out("freq_raw.csv")));
        profile_csv(packed, track(out("freq_packed.csv")));
    }

    // stage: diffuse compare (skipped when the pack is the identity width)
    const bool compression = cfg.pack_d < static_cast<Eigen::Index>(cfg.dim);
    ConvergenceReport compare;
    if (compression && cfg.diffuse_seeds > 0) {
        CompareConfig ccfg;
        ccfg.budget = cfg.diffuse_budget;
        ccfg.checkpoint_every = cfg.diffuse_checkpoint;
        ccfg.seeds.clear();
        for (std::size_t i = 0; i < cfg.diffuse_seeds; ++i)
            ccfg.seeds.push_back(cfg.seed + 1 + i);
        ccfg.batch = cfg.diffuse_batch;
        ccfg.lr = cfg.diffuse_lr;
        ccfg.eval_samples = cfg.diffuse_eval;
        ccfg.diffusion_steps = cfg.diffusion_steps;
        ccfg.threads = cfg.threads;
        compare = convergence_experiment(raw, packed, pack_fit.model, basis, ccfg);
        std::ofstream f(track(out("compare.csv")), std::ios::trunc);
        f << "representation,seed,checkpoint_step,train_loss,frechet\n";
        for (const auto& rec : compare.records)
            f << rec.representation << "," << rec.seed << "," << rec.step << ","
              << fmt(rec.train_loss) << "," << fmt(rec.frechet) << "\n";
    }

    // stage: eval
    {
        const GaussianStats raw_stats = gaussian_stats(Matrix(raw * basis));
        const GaussianStats rec_stats =
            gaussian_stats(Matrix(pack_fit.model.reconstruct(raw) * basis));
        std::ofstream f(track(out("eval.csv")), std::ios::trunc);
        f << "key,value\n";
        f << "recon_mse," << fmt(recon_mse) << "\n";
        f << "pca_mse," << fmt(pca_mse) << "\n";
        f << "optimality_gap," << fmt(gap) << "\n";
        f << "frechet_recon," << fmt(frechet_distance(rec_stats, raw_stats)) << "\n";
    }

    // summary assertions
    bool all = true;
    {
        std::ostringstream line;
        const bool ok = raw_pca.report.elbow_index &&
                        std::llabs(static_cast<long long>(*raw_pca.report.elbow_index) -
                                   static_cast<long long>(cfg.intrinsic)) <= 1;
        all = all && ok;
        line << "elbow_recovery=" << (ok ? "pass" : "fail") << " (elbow=";
        if (raw_pca.report.elbow_index) line << *raw_pca.report.elbow_index;
        else line << "none";
        line << ", intrinsic=" << cfg.intrinsic << ")";
        result.summary.push_back(line.str());
    }
    {
        const bool ok = gap <= 0.05;
        all = all && ok;
        result.summary.push_back("pca_optimality=" + std::string(ok ? "pass" : "fail") +
                                 " (gap=" + fmt_pct(gap) + ")");
    }
    {
        bool ok = true;
        std::ostringstream line;
        for (double f : {0.25, 0.5, 0.75}) {
            const double c_packed = cumulative_at_fraction(packed_pca.report, f);
            const double c_raw = cumulative_at_fraction(raw_pca.report, f);
            ok = ok && c_packed <= c_raw;
        }
        all = all && ok;
        line << "spectral_flatness=" << (ok ? "pass" : "fail")
             << " (packed cumulative <= raw at fractions 0.25/0.5/0.75)";
        result.summary.push_back(line.str());
    }
    if (compression && cfg.diffuse_seeds > 0) {
        const bool ok = compare.median_steps_packed <= compare.median_steps_raw;
        all = all && ok;
        std::ostringstream line;
        line << "convergence_ordering=" << (ok ? "pass" : "fail")
             << " (median steps-to-threshold packed=" << compare.median_steps_packed
             << ", raw=" << compare.median_steps_raw << ")";
        result.summary.push_back(line.str());
    } else {
        result.summary.push_back("convergence_ordering=not_applicable (no compression)");
    }

    {
        std::ofstream f(track(out("summary.txt")), std::ios::trunc);
        for (const auto& line : result.summary) f << line << "\n";
    }
    result.all_pass = all;
    return result;
}

}  // namespace repack
