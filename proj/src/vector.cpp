#include "vsd/vector.hpp"

#include "vsd/error.hpp"

#include <string>

namespace vsd {

bool all_finite(const DenseVector& v)
{
    return v.allFinite();
}

void require_finite(const DenseVector& v, std::string_view what)
{
    if (!all_finite(v))
        throw Error(ErrorCode::NonFinite, std::string(what));
}

void require_same_dim(const DenseVector& a, const DenseVector& b, std::string_view what)
{
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + " (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
}

DenseVector normalized(const DenseVector& v)
{
    const double norm = v.norm();
    if (norm == 0.0)
        throw Error(ErrorCode::ZeroNorm, "cannot normalize a zero vector");
    return v / norm;
}

}  // namespace vsd
