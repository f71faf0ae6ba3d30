#include "vsd/cca.hpp"

#include "vsd/container.hpp"
#include "vsd/error.hpp"

#include <algorithm>
#include <string>

namespace vsd {

namespace {

// Cholesky factor of the ridge-regularized sample covariance of `centred`.
Eigen::LLT<Matrix> regularized_cov_factor(const Matrix& centred, double ridge, const char* view)
{
    const auto samples = static_cast<double>(centred.rows());
    Matrix cov = (centred.transpose() * centred) / (samples - 1.0);
    cov.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::Numerical, std::string(view) + " covariance is not positive definite");
    return llt;
}

}  // namespace

CcaModel fit_cca(const Matrix& text, const Matrix& visual, int n, double ridge)
{
    if (text.rows() != visual.rows())
        throw Error(ErrorCode::DimensionMismatch, "text and visual views have different sample counts");
    if (n < 1)
        throw Error(ErrorCode::Validation, "latent dimension must be positive");
    if (!(ridge > 0))
        throw Error(ErrorCode::Validation, "ridge must be positive");
    if (text.rows() < n + 1)
        throw Error(ErrorCode::InsufficientData, std::to_string(text.rows()) + " pairs, need at least " +
                                                     std::to_string(n + 1));
    if (n > std::min(text.cols(), visual.cols()))
        throw Error(ErrorCode::InsufficientData, "latent dimension " + std::to_string(n) +
                                                     " exceeds the smaller view dimension " +
                                                     std::to_string(std::min(text.cols(), visual.cols())));
    if (!text.allFinite() || !visual.allFinite())
        throw Error(ErrorCode::NonFinite, "CCA input");

    CcaModel model;
    model.n = n;
    model.ridge = ridge;
    model.mean_t = text.colwise().mean().transpose();
    model.mean_c = visual.colwise().mean().transpose();
    const Matrix xt = text.rowwise() - model.mean_t.transpose();
    const Matrix xc = visual.rowwise() - model.mean_c.transpose();

    const auto llt_t = regularized_cov_factor(xt, ridge, "text");
    const auto llt_c = regularized_cov_factor(xc, ridge, "visual");
    const Matrix cross = (xt.transpose() * xc) / (static_cast<double>(text.rows()) - 1.0);

    // whitened = L_t^{-1} C_tc L_c^{-T}
    const Matrix left = llt_t.matrixL().solve(cross);
    const Matrix whitened = llt_c.matrixL().solve(left.transpose()).transpose();

    Eigen::BDCSVD<Matrix> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw Error(ErrorCode::Numerical, "SVD of the whitened cross-covariance failed");

    model.proj_t = llt_t.matrixU().solve(svd.matrixU().leftCols(n));
    model.proj_c = llt_c.matrixU().solve(svd.matrixV().leftCols(n));
    model.correlations = svd.singularValues().head(n).cwiseMax(0.0).cwiseMin(1.0);

    // Fix the sign of each component pair: largest-magnitude text weight positive.
    for (int k = 0; k < n; ++k) {
        Eigen::Index arg = 0;
        model.proj_t.col(k).cwiseAbs().maxCoeff(&arg);
        if (model.proj_t(arg, k) < 0) {
            model.proj_t.col(k) *= -1.0;
            model.proj_c.col(k) *= -1.0;
        }
    }
    if (!model.proj_t.allFinite() || !model.proj_c.allFinite())
        throw Error(ErrorCode::Numerical, "non-finite CCA projections");
    return model;
}

CcaModel fit_cca(std::span<const std::pair<DenseVector, DenseVector>> pairs, int n, double ridge)
{
    if (pairs.empty())
        throw Error(ErrorCode::InsufficientData, "no pairs");
    const auto dt = pairs.front().first.size();
    const auto dc = pairs.front().second.size();
    Matrix text(static_cast<Eigen::Index>(pairs.size()), dt);
    Matrix visual(static_cast<Eigen::Index>(pairs.size()), dc);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first.size() != dt || pairs[i].second.size() != dc)
            throw Error(ErrorCode::DimensionMismatch, "pair " + std::to_string(i) + " has inconsistent view dims");
        text.row(static_cast<Eigen::Index>(i)) = pairs[i].first.transpose();
        visual.row(static_cast<Eigen::Index>(i)) = pairs[i].second.transpose();
    }
    return fit_cca(text, visual, n, ridge);
}

DenseVector project(const CcaModel& model, const DenseVector& v, View view)
{
    const bool text = view == View::Text;
    const DenseVector& mean = text ? model.mean_t : model.mean_c;
    const Matrix& proj = text ? model.proj_t : model.proj_c;
    require_same_dim(v, mean, text ? "text vector vs CCA text view" : "visual vector vs CCA visual view");
    return proj.transpose() * (v - mean);
}

DenseVector fuse_interpolate(const DenseVector& a, const DenseVector& b, double lambda_t, double lambda_c)
{
    require_same_dim(a, b, "interpolated vectors");
    if (!std::isfinite(lambda_t) || !std::isfinite(lambda_c))
        throw Error(ErrorCode::NonFinite, "interpolation weights");
    return lambda_t * a + lambda_c * b;
}

DenseVector fuse_concat(const DenseVector& a, const DenseVector& b)
{
    DenseVector out(a.size() + b.size());
    out << normalized(a), normalized(b);
    return out;
}

void save_cca(const CcaModel& model, const std::filesystem::path& path)
{
    ModelContainer c;
    c.kind = "cca";
    c.set_scalar("n", model.n);
    c.set_scalar("ridge", model.ridge);
    c.strings["seed"] = {std::to_string(model.seed)};
    c.matrices["mean_t"] = model.mean_t;
    c.matrices["mean_c"] = model.mean_c;
    c.matrices["proj_t"] = model.proj_t;
    c.matrices["proj_c"] = model.proj_c;
    c.matrices["correlations"] = model.correlations;
    write_container(c, path);
}

CcaModel load_cca(const std::filesystem::path& path)
{
    const ModelContainer c = read_container(path, "cca");
    for (const char* name : {"mean_t", "mean_c", "correlations"})
        if (c.matrix(name).cols() != 1)
            throw Error(ErrorCode::Validation, path.string() + ": section " + name + " is not a vector");
    CcaModel m;
    m.n = static_cast<int>(c.scalar("n"));
    m.ridge = c.scalar("ridge");
    m.seed = parse_seed(c);
    m.mean_t = c.matrix("mean_t");
    m.mean_c = c.matrix("mean_c");
    m.proj_t = c.matrix("proj_t");
    m.proj_c = c.matrix("proj_c");
    m.correlations = c.matrix("correlations");
    if (m.proj_t.cols() != m.n || m.proj_c.cols() != m.n || m.correlations.size() != m.n ||
        m.mean_t.size() != m.proj_t.rows() || m.mean_c.size() != m.proj_c.rows())
        throw Error(ErrorCode::Validation, path.string() + ": inconsistent CCA model shapes");
    return m;
}

}  // namespace vsd
