#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace vsd {

// All in-memory arithmetic is done in double precision. Feature files store
// f32, which widens to double exactly.
using DenseVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

bool all_finite(const DenseVector& v);

// Throws NonFinite naming `what` if any entry is NaN or infinite.
void require_finite(const DenseVector& v, std::string_view what);

// Throws DimensionMismatch unless a and b have equal length.
void require_same_dim(const DenseVector& a, const DenseVector& b, std::string_view what);

// Unit-length copy of v. Throws ZeroNorm when ||v|| == 0.
DenseVector normalized(const DenseVector& v);

}  // namespace vsd
