#pragma once

#include <cstddef>
#include <optional>

#include "repack/tensor.hpp"

namespace repack {

// Raised when the input has zero total variance (all rows identical).
class DegenerateSpectrumError : public ValidationError {
public:
    explicit DegenerateSpectrumError(const std::string& what) : ValidationError(what) {}
};

struct SpectrumReport {
    Vector eigenvalues;        // descending, clamped at 0, length min(M,D)
    Vector explained_ratio;    // sums to 1
    Vector cumulative_ratio;   // non-decreasing, ends at 1
    std::optional<std::size_t> elbow_index;  // 1-based; empty when the curve has no knee
    double effective_rank = 1.0;
};

struct PcaResult {
    SpectrumReport report;
    Matrix directions;  // D x r principal directions, unit columns
    Vector mean;        // column means of the input
};

enum class PcaMethod {
    kAuto,             // data SVD when M < D, covariance eigendecomposition otherwise
    kCovarianceEigen,  // eigendecomposition of the D x D sample covariance
    kDataSvd,          // SVD of the centered data matrix, eigenvalue = sigma^2/(M-1)
};

// Sample-covariance spectrum (divisor M-1) of the centered rows. The two
// methods must agree within 1e-6 relative wherever both apply.
PcaResult pca_spectrum(const Matrix& rows, PcaMethod method = PcaMethod::kAuto);
PcaResult pca_spectrum(const FeatureTensor& rows, PcaMethod method = PcaMethod::kAuto);

// Kneedle-style detector: normalize (index, cumulative_ratio) to the unit
// square and take the argmax of vertical distance above the first-to-last
// chord, ties toward the smaller index. Returns empty when the curve is
// flat or linear (max distance < 1e-9). 1-based.
std::optional<std::size_t> elbow_detect(const SpectrumReport& report);

// exp(Shannon entropy of explained_ratio), natural log, 0*log0 = 0.
double effective_rank(const SpectrumReport& report);

}  // namespace repack
