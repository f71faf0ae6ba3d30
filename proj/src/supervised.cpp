#include "vsd/supervised.hpp"

#include "vsd/container.hpp"
#include "vsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace vsd {

std::vector<std::string> select_supervised_verbs(std::span<const ImageRecord> dataset, const SenseInventory& inv,
                                                 std::size_t min_images)
{
    std::map<std::string, std::pair<std::size_t, std::set<std::string>>> stats;
    for (const ImageRecord& r : dataset) {
        auto& [count, senses] = stats[r.verb];
        ++count;
        senses.insert(r.gold_sense_id);
    }
    std::vector<std::string> out;
    for (const auto& [verb, s] : stats)
        if (s.first >= min_images && s.second.size() >= 2 && inv.contains(verb))
            out.push_back(verb);
    return out;
}

namespace {

// Row-wise softmax of logits, stabilized by subtracting the row maximum.
Matrix softmax_rows(const Matrix& logits)
{
    Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

}  // namespace

LrGradient lr_loss_and_gradient(const Matrix& weights, const DenseVector& bias, const Matrix& x,
                                std::span<const int> labels, double l2)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index k = weights.cols();
    if (weights.rows() != x.cols() || bias.size() != k || static_cast<Eigen::Index>(labels.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, "logistic regression shapes");
    if (n == 0)
        throw Error(ErrorCode::EmptyInput, "no training examples");

    Matrix logits = x * weights;
    logits.rowwise() += bias.transpose();
    const Matrix shifted = logits.colwise() - logits.rowwise().maxCoeff();
    const Eigen::VectorXd log_norm = shifted.array().exp().rowwise().sum().log();

    double nll = 0;
    Matrix residual = softmax_rows(logits);  // p - onehot(y)
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= k)
            throw Error(ErrorCode::Validation, "label " + std::to_string(y) + " out of range");
        nll += log_norm[i] - shifted(i, y);
        residual(i, y) -= 1.0;
    }

    LrGradient g;
    const double inv_n = 1.0 / static_cast<double>(n);
    g.loss = nll * inv_n + 0.5 * l2 * weights.squaredNorm();
    g.weights = x.transpose() * residual * inv_n + l2 * weights;
    g.bias = residual.colwise().sum().transpose() * inv_n;
    return g;
}

LrTraining train_lr(const Matrix& x, std::span<const int> labels, std::vector<std::string> classes,
                    const LrParams& params)
{
    if (static_cast<Eigen::Index>(labels.size()) != x.rows())
        throw Error(ErrorCode::DimensionMismatch, "labels vs examples");
    if (!x.allFinite())
        throw Error(ErrorCode::NonFinite, "training features");
    if (!(params.l2 >= 0) || !(params.learning_rate > 0) || params.epochs < 0)
        throw Error(ErrorCode::Validation, "invalid logistic regression hyperparameters");
    const std::set<int> present(labels.begin(), labels.end());
    if (present.size() < 2)
        throw Error(ErrorCode::InsufficientData, "training data must contain at least two classes");
    if (classes.size() < 2 || *present.rbegin() >= static_cast<int>(classes.size()) || *present.begin() < 0)
        throw Error(ErrorCode::Validation, "labels must index into at least two class names");

    const auto k = static_cast<Eigen::Index>(classes.size());
    LrTraining out;
    LrModel& m = out.model;
    m.classes = std::move(classes);
    m.params = params;
    m.weights.resize(x.cols(), k);
    m.bias = DenseVector::Zero(k);

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> init(0.0, 0.01);
    for (Eigen::Index j = 0; j < m.weights.cols(); ++j)
        for (Eigen::Index i = 0; i < m.weights.rows(); ++i)
            m.weights(i, j) = init(rng);

    out.loss_history.reserve(static_cast<std::size_t>(params.epochs) + 1);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const LrGradient g = lr_loss_and_gradient(m.weights, m.bias, x, labels, params.l2);
        out.loss_history.push_back(g.loss);
        m.weights -= params.learning_rate * g.weights;
        m.bias -= params.learning_rate * g.bias;
    }
    out.loss_history.push_back(lr_loss_and_gradient(m.weights, m.bias, x, labels, params.l2).loss);
    if (!m.weights.allFinite() || !m.bias.allFinite())
        throw Error(ErrorCode::Numerical, "training diverged");
    return out;
}

LrPrediction predict_lr(const LrModel& model, const DenseVector& x)
{
    if (x.size() != model.feature_dim())
        throw Error(ErrorCode::DimensionMismatch, "feature vector has " + std::to_string(x.size()) +
                                                      " entries, model expects " +
                                                      std::to_string(model.feature_dim()));
    const DenseVector logits = model.weights.transpose() * x + model.bias;
    DenseVector p = (logits.array() - logits.maxCoeff()).exp();
    p /= p.sum();

    LrPrediction out;
    for (Eigen::Index i = 1; i < p.size(); ++i)
        if (p[i] > p[static_cast<Eigen::Index>(out.class_index)])
            out.class_index = static_cast<std::size_t>(i);
    out.sense_id = model.classes[out.class_index];
    out.probabilities = std::move(p);
    return out;
}

TrainTestSplit split_train_test(std::span<const ImageRecord> records, double ratio, std::uint64_t seed)
{
    if (!(ratio > 0 && ratio < 1))
        throw Error(ErrorCode::Validation, "split ratio must lie in (0, 1)");

    std::map<std::string, std::size_t> per_verb;
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        ++per_verb[records[i].verb];
        groups[{records[i].verb, records[i].gold_sense_id}].push_back(i);
    }
    for (const auto& [verb, count] : per_verb)
        if (count < 2)
            throw Error(ErrorCode::InsufficientData, "verb " + verb + " has a single image; cannot split");

    std::mt19937_64 rng(seed);
    std::vector<char> in_train(records.size(), 0);
    for (auto& [key, idx] : groups) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t m = idx.size();
        std::size_t n_train = m;
        if (m >= 2) {
            n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(m)));
            n_train = std::clamp<std::size_t>(n_train, 1, m - 1);
        }
        for (std::size_t j = 0; j < n_train; ++j)
            in_train[idx[j]] = 1;
    }

    TrainTestSplit out;
    for (std::size_t i = 0; i < records.size(); ++i)
        (in_train[i] ? out.train : out.test).push_back(records[i]);
    return out;
}

void save_lr(const LrModel& model, const std::filesystem::path& path)
{
    ModelContainer c;
    c.kind = "logreg";
    c.strings["verb"] = {model.verb};
    c.strings["classes"] = model.classes;
    c.strings["seed"] = {std::to_string(model.params.seed)};
    c.matrices["weights"] = model.weights;
    c.matrices["bias"] = model.bias;
    c.set_scalar("l2", model.params.l2);
    c.set_scalar("epochs", model.params.epochs);
    c.set_scalar("learning_rate", model.params.learning_rate);
    write_container(c, path);
}

LrModel load_lr(const std::filesystem::path& path)
{
    const ModelContainer c = read_container(path, "logreg");
    LrModel m;
    const auto& verb = c.string_list("verb");
    if (verb.size() != 1)
        throw Error(ErrorCode::Validation, path.string() + ": malformed verb section");
    m.verb = verb.front();
    m.classes = c.string_list("classes");
    m.params.seed = parse_seed(c);
    m.params.l2 = c.scalar("l2");
    m.params.epochs = static_cast<int>(c.scalar("epochs"));
    m.params.learning_rate = c.scalar("learning_rate");
    m.weights = c.matrix("weights");
    const Matrix& bias = c.matrix("bias");
    if (bias.cols() != 1 || bias.rows() != m.weights.cols() ||
        static_cast<std::size_t>(m.weights.cols()) != m.classes.size() || m.classes.size() < 2)
        throw Error(ErrorCode::Validation, path.string() + ": inconsistent logistic regression shapes");
    m.bias = bias;
    return m;
}

}  // namespace vsd
