#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repack/error.hpp"

namespace repack {

// Dense rank-N real tensor, row-major, float32 storage (the on-disk
// precision). Numerics convert to double matrices at the call site.
struct FeatureTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    FeatureTensor() = default;
    FeatureTensor(std::vector<std::uint32_t> d, std::vector<float> v)
        : dims(std::move(d)), data(std::move(v)) {}

    std::size_t rank() const { return dims.size(); }

    std::size_t numel() const {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }

    bool operator==(const FeatureTensor& o) const {
        return dims == o.dims && data == o.data;
    }
};

inline std::string dims_to_string(const std::vector<std::uint32_t>& dims) {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims[i]);
    }
    return s + "]";
}

// data length must match product(dims); every value finite.
inline void validate_tensor(const FeatureTensor& t) {
    if (t.dims.empty())
        throw ValidationError("tensor has no dimensions");
    for (auto d : t.dims)
        if (d == 0) throw ValidationError("tensor dimension is zero");
    if (t.data.size() != t.numel())
        throw ValidationError("tensor data length " + std::to_string(t.data.size()) +
                              " does not match dims " + dims_to_string(t.dims));
    for (float v : t.data)
        if (!std::isfinite(v))
            throw ValidationError("tensor contains non-finite values");
}

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rank-2 tensor -> double matrix (rows x cols).
inline Matrix to_matrix(const FeatureTensor& t) {
    if (t.rank() != 2)
        throw ShapeError("expected rank-2 tensor, got rank " + std::to_string(t.rank()));
    const auto rows = static_cast<Eigen::Index>(t.dims[0]);
    const auto cols = static_cast<Eigen::Index>(t.dims[1]);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = static_cast<double>(t.data[static_cast<std::size_t>(i) * cols + j]);
    return m;
}

inline FeatureTensor from_matrix(const Matrix& m) {
    FeatureTensor t;
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.resize(static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            t.data[static_cast<std::size_t>(i) * m.cols() + j] = static_cast<float>(m(i, j));
    return t;
}

// (h,w,D) feature map -> (h*w)xD sample matrix. Row (i*w + j) of the
// output is the channel vector at (i,j); same underlying layout.
inline FeatureTensor flatten_spatial(const FeatureTensor& t) {
    if (t.rank() != 3)
        throw ShapeError("flatten_spatial expects rank-3 input, got rank " +
                         std::to_string(t.rank()));
    FeatureTensor out = t;
    out.dims = {t.dims[0] * t.dims[1], t.dims[2]};
    return out;
}

inline FeatureTensor unflatten_spatial(const FeatureTensor& t, std::uint32_t h, std::uint32_t w) {
    if (t.rank() != 2)
        throw ShapeError("unflatten_spatial expects rank-2 input, got rank " +
                         std::to_string(t.rank()));
    if (static_cast<std::uint64_t>(h) * w != t.dims[0])
        throw ShapeError("unflatten_spatial: h*w = " + std::to_string(std::uint64_t(h) * w) +
                         " does not match row count " + std::to_string(t.dims[0]));
    FeatureTensor out = t;
    out.dims = {h, w, t.dims[1]};
    return out;
}

}  // namespace repack
