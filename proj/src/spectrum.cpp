#include "repack/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace repack {

namespace {

constexpr double kEigClampRel = 1e-10;

// Eigenvector signs are arbitrary; make the largest-magnitude component
// positive so both computation paths produce comparable directions.
void fix_direction_signs(Matrix& dirs) {
    for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
        Eigen::Index imax = 0;
        dirs.col(j).cwiseAbs().maxCoeff(&imax);
        if (dirs(imax, j) < 0.0) dirs.col(j) = -dirs.col(j);
    }
}

}  // namespace

PcaResult pca_spectrum(const Matrix& rows, PcaMethod method) {
    const Eigen::Index m = rows.rows();
    const Eigen::Index d = rows.cols();
    if (m < 2) throw ValidationError("pca_spectrum needs at least 2 rows");

    PcaResult res;
    res.mean = rows.colwise().mean();
    Matrix centered = rows.rowwise() - res.mean.transpose();

    if (centered.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateSpectrumError("all rows identical: zero total variance");

    const Eigen::Index r = std::min(m, d);
    Vector eig(r);
    if (method == PcaMethod::kAuto)
        method = (m < d) ? PcaMethod::kDataSvd : PcaMethod::kCovarianceEigen;

    if (method == PcaMethod::kDataSvd) {
        Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
        const Vector& sv = svd.singularValues();  // descending
        for (Eigen::Index i = 0; i < r; ++i)
            eig(i) = sv(i) * sv(i) / static_cast<double>(m - 1);
        res.directions = svd.matrixV().leftCols(r);
    } else {
        Matrix cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
        if (solver.info() != Eigen::Success)
            throw ValidationError("eigendecomposition failed to converge");
        // ascending -> descending; keep only the top min(M,D) components
        const Vector& ev = solver.eigenvalues();
        res.directions.resize(d, r);
        for (Eigen::Index i = 0; i < r; ++i) {
            eig(i) = ev(d - 1 - i);
            res.directions.col(i) = solver.eigenvectors().col(d - 1 - i);
        }
    }
    fix_direction_signs(res.directions);

    const double largest = eig(0);
    for (Eigen::Index i = 0; i < r; ++i)
        if (eig(i) < kEigClampRel * largest) eig(i) = 0.0;

    const double total = eig.sum();
    if (total <= 0.0)
        throw DegenerateSpectrumError("zero total variance after clamping");

    SpectrumReport& rep = res.report;
    rep.eigenvalues = eig;
    rep.explained_ratio = eig / total;
    rep.cumulative_ratio.resize(r);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) {
        acc += rep.explained_ratio(i);
        rep.cumulative_ratio(i) = acc;
    }
    rep.effective_rank = effective_rank(rep);
    rep.elbow_index = (r >= 3) ? elbow_detect(rep) : std::nullopt;
    return res;
}

PcaResult pca_spectrum(const FeatureTensor& rows, PcaMethod method) {
    return pca_spectrum(to_matrix(rows), method);
}

std::optional<std::size_t> elbow_detect(const SpectrumReport& report) {
    const Eigen::Index n = report.cumulative_ratio.size();
    if (n < 3) throw ValidationError("elbow_detect needs at least 3 components");

    const Vector& c = report.cumulative_ratio;
    const double span = c(n - 1) - c(0);
    if (span < 1e-12) return std::nullopt;  // constant curve, no knee

    double best = -1.0;
    Eigen::Index best_i = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n - 1);
        const double y = (c(i) - c(0)) / span;
        const double dist = y - x;  // vertical distance above the unit-square chord
        if (dist > best) {
            best = dist;
            best_i = i;
        }
    }
    if (best < 1e-9) return std::nullopt;
    return static_cast<std::size_t>(best_i) + 1;  // 1-based
}

double effective_rank(const SpectrumReport& report) {
    if (report.eigenvalues.size() == 0 || report.eigenvalues.maxCoeff() <= 0.0)
        throw ValidationError("effective_rank needs at least one positive eigenvalue");
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < report.explained_ratio.size(); ++i) {
        const double p = report.explained_ratio(i);
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

}  // namespace repack
