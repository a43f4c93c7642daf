#include "repack/metrics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace repack {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

Eigen::ArrayXXd gaussian_window() {
    Eigen::ArrayXXd w(kSsimWindow, kSsimWindow);
    const double c = (kSsimWindow - 1) / 2.0;
    for (int i = 0; i < kSsimWindow; ++i)
        for (int j = 0; j < kSsimWindow; ++j) {
            const double dx = i - c, dy = j - c;
            w(i, j) = std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma));
        }
    return w / w.sum();
}

Eigen::ArrayXXd channel_array(const FeatureTensor& t, std::uint32_t ch) {
    const std::uint32_t h = t.dims[0], w = t.dims[1], c = t.dims[2];
    Eigen::ArrayXXd a(h, w);
    for (std::uint32_t i = 0; i < h; ++i)
        for (std::uint32_t j = 0; j < w; ++j)
            a(i, j) = static_cast<double>(t.data[(std::size_t(i) * w + j) * c + ch]);
    return a;
}

// PSD square root by symmetric eigendecomposition, negatives clamped.
Matrix psd_sqrt(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    Vector ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
    return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

double psnr(const FeatureTensor& ref, const FeatureTensor& rec, double peak) {
    if (ref.dims != rec.dims) throw ShapeError("psnr: tensors have different dims");
    if (peak <= 0.0) throw ValidationError("psnr: peak must be positive");
    validate_tensor(ref);
    validate_tensor(rec);
    double mse = 0.0;
    for (std::size_t i = 0; i < ref.data.size(); ++i) {
        const double d = static_cast<double>(ref.data[i]) - static_cast<double>(rec.data[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(ref.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const FeatureTensor& ref, const FeatureTensor& rec, double peak) {
    if (ref.dims != rec.dims) throw ShapeError("ssim: tensors have different dims");
    if (ref.rank() != 3) throw ShapeError("ssim expects rank-3 (h,w,c) images");
    if (peak <= 0.0) throw ValidationError("ssim: peak must be positive");
    const std::uint32_t h = ref.dims[0], w = ref.dims[1], c = ref.dims[2];
    if (h < kSsimWindow || w < kSsimWindow)
        throw ValidationError("ssim: image smaller than the 11x11 window");

    const Eigen::ArrayXXd win = gaussian_window();
    const double c1 = (kSsimK1 * peak) * (kSsimK1 * peak);
    const double c2 = (kSsimK2 * peak) * (kSsimK2 * peak);

    double sum = 0.0;
    std::size_t positions = 0;
    for (std::uint32_t ch = 0; ch < c; ++ch) {
        const Eigen::ArrayXXd x = channel_array(ref, ch);
        const Eigen::ArrayXXd y = channel_array(rec, ch);
        for (std::uint32_t i = 0; i + kSsimWindow <= h; ++i) {
            for (std::uint32_t j = 0; j + kSsimWindow <= w; ++j) {
                const auto xw = x.block(i, j, kSsimWindow, kSsimWindow);
                const auto yw = y.block(i, j, kSsimWindow, kSsimWindow);
                const double mx = (win * xw).sum();
                const double my = (win * yw).sum();
                const double vx = (win * (xw - mx).square()).sum();
                const double vy = (win * (yw - my).square()).sum();
                const double cov = (win * (xw - mx) * (yw - my)).sum();
                const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
                const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
                sum += num / den;
                ++positions;
            }
        }
    }
    return sum / static_cast<double>(positions);
}

GaussianStats gaussian_stats(const Matrix& rows) {
    const Eigen::Index m = rows.rows();
    if (m < 2) throw ValidationError("gaussian_stats needs at least 2 rows");
    GaussianStats s;
    s.count = static_cast<std::size_t>(m);
    s.mean = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - s.mean.transpose();
    s.covariance = (centered.transpose() * centered) / static_cast<double>(m - 1);
    s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
    return s;
}

GaussianStats gaussian_stats(const FeatureTensor& rows) {
    return gaussian_stats(to_matrix(rows));
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    if (a.mean.size() != b.mean.size())
        throw ShapeError("frechet_distance: stats have different dimensions");
    const Matrix root_a = psd_sqrt(a.covariance);
    Matrix inner = root_a * b.covariance * root_a;
    inner = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(inner);
    double trace_sqrt = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double ev = solver.eigenvalues()(i);
        if (ev > 1e-10) trace_sqrt += std::sqrt(ev);
    }
    const double dist = (a.mean - b.mean).squaredNorm() + a.covariance.trace() +
                        b.covariance.trace() - 2.0 * trace_sqrt;
    return dist > 0.0 ? dist : 0.0;
}

}  // namespace repack
