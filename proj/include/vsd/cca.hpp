#pragma once

#include "vsd/vector.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>

namespace vsd {

enum class View { Text, Visual };

// Linear CCA between a text view and a visual view.
//
// proj_t / proj_c hold one canonical direction per column; projecting the
// centred inputs gives n latent coordinates in which component k of the two
// views has sample correlation correlations[k] (exactly so in the limit of a
// vanishing ridge).
struct CcaModel {
    int n = 0;
    DenseVector mean_t;
    DenseVector mean_c;
    Matrix proj_t;  // dim_t x n
    Matrix proj_c;  // dim_c x n
    DenseVector correlations;  // descending, in [0, 1]
    double ridge = 0;
    std::uint64_t seed = 0;  // split seed used to pick the training pairs

    Eigen::Index text_dim() const { return proj_t.rows(); }
    Eigen::Index visual_dim() const { return proj_c.rows(); }
};

// Fits CCA on paired samples, one sample per row of `text` and `visual`.
//
// Both within-view covariances get `ridge` added to their diagonal, are
// whitened through their Cholesky factors, and the whitened
// cross-covariance is decomposed by SVD. The leading n singular values are
// the canonical correlations.
//
// Throws InsufficientData (fewer than n + 1 samples, n > min(dim_t, dim_c)),
// NonFinite, Validation (ridge <= 0) or Numerical (covariance not positive
// definite even after the ridge).
CcaModel fit_cca(const Matrix& text, const Matrix& visual, int n, double ridge);

CcaModel fit_cca(std::span<const std::pair<DenseVector, DenseVector>> pairs, int n, double ridge);

// (v - mean_view)^T proj_view, length n. Throws DimensionMismatch.
DenseVector project(const CcaModel& model, const DenseVector& v, View view);

// lambda_t * a + lambda_c * b. Throws DimensionMismatch / NonFinite.
DenseVector fuse_interpolate(const DenseVector& a, const DenseVector& b, double lambda_t, double lambda_c);

// normalize(a) followed by normalize(b). Throws ZeroNorm if either side is zero.
DenseVector fuse_concat(const DenseVector& a, const DenseVector& b);

void save_cca(const CcaModel& model, const std::filesystem::path& path);
CcaModel load_cca(const std::filesystem::path& path);

}  // namespace vsd
