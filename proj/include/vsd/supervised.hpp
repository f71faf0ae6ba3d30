#pragma once

#include "vsd/imagerep.hpp"
#include "vsd/inventory.hpp"
#include "vsd/vector.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vsd {

// Verbs with at least `min_images` images and at least two distinct gold
// senses, in lexicographic order.
std::vector<std::string> select_supervised_verbs(std::span<const ImageRecord> dataset, const SenseInventory& inv,
                                                 std::size_t min_images = 20);

struct LrParams {
    double l2 = 1e-3;
    int epochs = 500;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
};

// Per-verb multinomial logistic regression.
struct LrModel {
    std::string verb;
    std::vector<std::string> classes;  // sense ids, index = class
    Matrix weights;                    // feature_dim x #classes
    DenseVector bias;                  // #classes
    LrParams params;

    Eigen::Index feature_dim() const { return weights.rows(); }
    std::size_t num_classes() const { return classes.size(); }
};

struct LrGradient {
    double loss = 0;
    Matrix weights;
    DenseVector bias;
};

// Mean softmax cross-entropy over the rows of `x` plus (l2 / 2) * ||W||^2,
// and its analytic gradient. The bias is not regularized.
LrGradient lr_loss_and_gradient(const Matrix& weights, const DenseVector& bias, const Matrix& x,
                                std::span<const int> labels, double l2);

struct LrTraining {
    LrModel model;
    std::vector<double> loss_history;  // loss before each epoch, then the final loss
};

// Full-batch gradient descent from a small seeded random start.
// `x` holds one example per row, labels index into `classes`.
// Throws InsufficientData when fewer than two classes occur, NonFinite,
// DimensionMismatch.
LrTraining train_lr(const Matrix& x, std::span<const int> labels, std::vector<std::string> classes,
                    const LrParams& params);

struct LrPrediction {
    std::size_t class_index = 0;
    std::string sense_id;
    DenseVector probabilities;
};

// Softmax over x^T W + b; argmax ties go to the lowest class index.
LrPrediction predict_lr(const LrModel& model, const DenseVector& x);

struct TrainTestSplit {
    std::vector<ImageRecord> train;
    std::vector<ImageRecord> test;
};

// Stratified per (verb, gold sense): each group of m images puts
// round(ratio * m) of them in train, clamped to [1, m - 1] when m >= 2 (a
// singleton group goes to train). Deterministic given the seed.
// Throws InsufficientData for a verb with a single image.
TrainTestSplit split_train_test(std::span<const ImageRecord> records, double ratio, std::uint64_t seed);

void save_lr(const LrModel& model, const std::filesystem::path& path);
LrModel load_lr(const std::filesystem::path& path);

}  // namespace vsd
