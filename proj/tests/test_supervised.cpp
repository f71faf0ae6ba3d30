#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "engineered.hpp"
#include "oracles.hpp"
#include "test_support.hpp"
#include "vsd/supervised.hpp"

#include <set>

using namespace vsd;
using vsd::test::error_code_of;
using vsd::test::vec;

namespace {

DenseVector pack(const Matrix& w, const DenseVector& b)
{
    DenseVector theta(w.size() + b.size());
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            theta[i++] = w(r, c);
    theta.tail(b.size()) = b;
    return theta;
}

ImageRecord rec(std::string id, std::string verb, std::string sense)
{
    ImageRecord r;
    r.image_id = std::move(id);
    r.verb = std::move(verb);
    r.gold_sense_id = std::move(sense);
    return r;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 4, k = 3, n = 12;
        const Matrix x = oracle::gaussian(n, d, rng);
        const Matrix w = oracle::gaussian(d, k, rng);
        const DenseVector b = oracle::gaussian(k, 1, rng).col(0);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i)
            labels[static_cast<std::size_t>(i)] = static_cast<int>(rng() % k);
        const double l2 = 0.05;

        const auto g = lr_loss_and_gradient(w, b, x, labels, l2);
        const DenseVector theta = pack(w, b);
        CHECK(g.loss == doctest::Approx(oracle::softmax_loss(theta, x, labels, k, l2)).epsilon(1e-12));
        const DenseVector numeric = oracle::central_differences(
            [&](const DenseVector& t) { return oracle::softmax_loss(t, x, labels, k, l2); }, theta, 1e-5);
        const DenseVector analytic = pack(g.weights, g.bias);
        CHECK((analytic - numeric).norm() / std::max(1.0, numeric.norm()) < 1e-6);
    }
}

TEST_CASE("softmax prediction is shift invariant in the bias")
{
    std::mt19937_64 rng(22);
    LrModel m;
    m.classes = {"a", "b", "c"};
    m.weights = oracle::gaussian(3, 3, rng);
    m.bias = vec({0.1, -0.2, 0.3});
    const DenseVector x = vec({0.5, -1, 2});
    const auto p = predict_lr(m, x);
    CHECK(p.probabilities.sum() == doctest::Approx(1.0));
    m.bias.array() += 1000.0;
    const auto q = predict_lr(m, x);
    CHECK(q.probabilities.isApprox(p.probabilities, 1e-12));
    CHECK(q.class_index == p.class_index);
    CHECK(q.sense_id == m.classes[q.class_index]);
}

TEST_CASE("training separates separable data and lowers the loss monotonically")
{
    Matrix x(6, 2);
    x << 1, 0, 0.9, 0.1, 0.8, 0, 0, 1, 0.1, 0.9, 0, 0.8;
    const std::vector<int> labels = {0, 0, 0, 1, 1, 1};
    const auto t = train_lr(x, labels, {"s.01", "s.02"}, LrParams{.seed = 3});
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        CHECK(predict_lr(t.model, x.row(i).transpose()).class_index ==
              static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]));
    REQUIRE(t.loss_history.size() == 501);
    for (std::size_t i = 1; i < t.loss_history.size(); ++i)
        CHECK(t.loss_history[i] <= t.loss_history[i - 1] + 1e-12);

    const auto again = train_lr(x, labels, {"s.01", "s.02"}, LrParams{.seed = 3});
    CHECK(again.model.weights == t.model.weights);
}

TEST_CASE("uninformative features predict the majority class")
{
    const Matrix x = Matrix::Ones(5, 3);
    const std::vector<int> labels = {1, 1, 1, 0, 0};
    const auto t = train_lr(x, labels, {"a", "b"}, LrParams{});
    CHECK(predict_lr(t.model, DenseVector::Ones(3)).sense_id == "b");
}

TEST_CASE("training errors")
{
    const Matrix x = Matrix::Ones(3, 2);
    const std::vector<int> one_class = {0, 0, 0};
    CHECK(error_code_of([&] { train_lr(x, one_class, {"a", "b"}, LrParams{}); }) == ErrorCode::InsufficientData);
    const std::vector<int> short_labels = {0, 1};
    CHECK(error_code_of([&] { train_lr(x, short_labels, {"a", "b"}, LrParams{}); }) == ErrorCode::DimensionMismatch);
    Matrix bad = x;
    bad(0, 0) = std::numeric_limits<double>::infinity();
    const std::vector<int> labels = {0, 1, 0};
    CHECK(error_code_of([&] { train_lr(bad, labels, {"a", "b"}, LrParams{}); }) == ErrorCode::NonFinite);
}

TEST_CASE("stratified split")
{
    std::vector<ImageRecord> records;
    for (int i = 0; i < 10; ++i)
        records.push_back(rec("a" + std::to_string(i), "play", "play.01"));
    for (int i = 0; i < 5; ++i)
        records.push_back(rec("b" + std::to_string(i), "play", "play.02"));
    records.push_back(rec("c0", "play", "play.03"));
    for (int i = 0; i < 2; ++i)
        records.push_back(rec("d" + std::to_string(i), "ride", "ride.01"));

    const auto s = split_train_test(records, 0.8, 5);
    auto count = [](const std::vector<ImageRecord>& rs, const std::string& sense) {
        return std::count_if(rs.begin(), rs.end(), [&](const auto& r) { return r.gold_sense_id == sense; });
    };
    CHECK(count(s.train, "play.01") == 8);
    CHECK(count(s.test, "play.01") == 2);
    CHECK(count(s.train, "play.02") == 4);
    CHECK(count(s.train, "play.03") == 1);
    CHECK(count(s.test, "play.03") == 0);
    CHECK(count(s.train, "ride.01") == 1);  // round(1.6) clamped to m - 1
    CHECK(count(s.test, "ride.01") == 1);
    CHECK(s.train.size() + s.test.size() == records.size());

    std::set<std::string> ids;
    for (const auto& r : s.train)
        ids.insert(r.image_id);
    for (const auto& r : s.test)
        CHECK(ids.insert(r.image_id).second);

    const auto same = split_train_test(records, 0.8, 5);
    CHECK(same.train == s.train);
    CHECK(same.test == s.test);

    const std::vector<ImageRecord> lonely = {rec("x", "cut", "cut.01")};
    CHECK(error_code_of([&] { split_train_test(lonely, 0.8, 1); }) == ErrorCode::InsufficientData);
}

TEST_CASE("verb selection needs enough images and two senses")
{
    const auto w = test::engineered_world(10);
    CHECK(select_supervised_verbs(w.records, w.inventory, 20) == std::vector<std::string>{"cut", "play", "ride"});
    CHECK(select_supervised_verbs(w.records, w.inventory, 21).empty());
    std::vector<ImageRecord> one_sense;
    for (const auto& r : w.records)
        if (r.gold_sense_id != "cut.02")
            one_sense.push_back(r);
    CHECK(select_supervised_verbs(one_sense, w.inventory, 10) == std::vector<std::string>{"play", "ride"});
}

TEST_CASE("model save and load")
{
    test::TempDir dir;
    Matrix x(4, 2);
    x << 1, 0, 0, 1, 1, 0.1, 0.1, 1;
    const std::vector<int> labels = {0, 1, 0, 1};
    auto m = train_lr(x, labels, {"p.01", "p.02"}, LrParams{.epochs = 20, .seed = 99}).model;
    m.verb = "play";
    save_lr(m, dir / "lr.bin");
    const auto back = load_lr(dir / "lr.bin");
    CHECK(back.verb == "play");
    CHECK(back.classes == m.classes);
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.params.seed == 99);
    CHECK(back.params.epochs == 20);
}
