#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "engineered.hpp"
#include "oracles.hpp"
#include "test_support.hpp"
#include "vsd/disambig.hpp"

using namespace vsd;
using vsd::test::error_code_of;
using vsd::test::vec;

namespace {

RepConfig config(Channel c, Setting s = Setting::Gold, Fusion f = Fusion::None)
{
    return default_config(c, s, f);
}

}  // namespace

TEST_CASE("score_dot is cosine similarity")
{
    CHECK(score_dot(vec({1, 0}), vec({1, 0})) == doctest::Approx(1.0));
    CHECK(score_dot(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
    CHECK(score_dot(vec({1, 1}), vec({2, 2})) == doctest::Approx(1.0));
    CHECK(score_dot(vec({1, 0}), vec({-3, 0})) == doctest::Approx(-1.0));
    CHECK(error_code_of([] { score_dot(vec({0, 0}), vec({1, 0})); }) == ErrorCode::ZeroNorm);
    CHECK(error_code_of([] { score_dot(vec({1}), vec({1, 0})); }) == ErrorCode::DimensionMismatch);

    std::mt19937_64 rng(9);
    for (int i = 0; i < 30; ++i) {
        const DenseVector a = oracle::gaussian(5, 1, rng).col(0), b = oracle::gaussian(5, 1, rng).col(0);
        CHECK(score_dot(a, b) == doctest::Approx(oracle::cosine(a, b)).epsilon(1e-12));
        CHECK(score_dot(a * 7.5, b * 0.01) == doctest::Approx(score_dot(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("select_sense breaks ties by rank and skips zero vectors")
{
    std::map<std::string, double> scores;
    const std::vector<Candidate> tied = {{"x.03", 3, vec({1, 0})}, {"x.01", 1, vec({2, 0})}, {"x.02", 2, vec({0, 1})}};
    const auto best = select_sense(vec({1, 0}), tied, scores);
    REQUIRE(best);
    CHECK(tied[*best].sense_id == "x.01");
    CHECK(scores.size() == 3);

    const std::vector<Candidate> with_zero = {{"x.01", 1, vec({0, 0})}, {"x.02", 2, vec({-1, 0})}};
    scores.clear();
    const auto pick = select_sense(vec({1, 0}), with_zero, scores);
    REQUIRE(pick);
    CHECK(with_zero[*pick].sense_id == "x.02");
    CHECK_FALSE(scores.contains("x.01"));

    const std::vector<Candidate> none = {{"x.01", 1, vec({0, 0})}};
    CHECK_FALSE(select_sense(vec({1, 0}), none, scores));
}

TEST_CASE("engineered world is solved by every unimodal and concat channel")
{
    const auto w = test::engineered_world();
    const auto res = w.resources();
    for (Setting s : {Setting::Gold, Setting::Pred})
        for (Channel c : {Channel::O, Channel::C, Channel::O_C, Channel::CNN}) {
            const auto cfg = config(c, s);
            for (const auto& r : w.records) {
                const auto p = disambiguate(r, cfg, res);
                CHECK_MESSAGE(p.predicted_sense_id == r.gold_sense_id, to_string(c), " ", r.image_id);
                CHECK_FALSE(p.fallback);
            }
        }
    for (Channel c : {Channel::CNN_O, Channel::CNN_C, Channel::CNN_O_C}) {
        const auto cfg = config(c, Setting::Gold, Fusion::Concat);
        for (const auto& r : w.records)
            CHECK(disambiguate(r, cfg, res).predicted_sense_id == r.gold_sense_id);
    }
}

TEST_CASE("cached and uncached paths agree")
{
    const auto w = test::engineered_world();
    const auto res = w.resources();
    const auto cache = SenseRepCache::build(res);
    CHECK(cache.size() == 6);
    for (Channel c : {Channel::O_C, Channel::CNN}) {
        const auto cfg = config(c);
        for (const auto& r : w.records)
            CHECK(disambiguate(r, cfg, res, &cache) == disambiguate(r, cfg, res));
    }
}

TEST_CASE("cca fusion runs on the engineered world")
{
    auto w = test::engineered_world(6);
    Matrix t(static_cast<Eigen::Index>(w.records.size()), 12), v(t.rows(), 6);
    const auto text_cfg = config(Channel::O_C);
    for (std::size_t i = 0; i < w.records.size(); ++i) {
        t.row(static_cast<Eigen::Index>(i)) = build_text_image_rep(w.records[i], text_cfg, w.embeddings).transpose();
        v.row(static_cast<Eigen::Index>(i)) = visual_image_rep(w.records[i], w.image_features).transpose();
    }
    const CcaModel m = fit_cca(t, v, 5, 1e-3);
    auto res = w.resources();
    res.cca = &m;

    for (CcaCombine combine : {CcaCombine::Interpolate, CcaCombine::Concat}) {
        auto cfg = config(Channel::CNN_O_C, Setting::Gold, Fusion::Cca);
        cfg.cca_combine = combine;
        std::size_t correct = 0;
        for (const auto& r : w.records) {
            const auto p = disambiguate(r, cfg, res);
            CHECK(p.scores.size() == 2);
            correct += p.predicted_sense_id == r.gold_sense_id;
        }
        CHECK(correct > w.records.size() / 2);
    }

    res.cca = nullptr;
    CHECK(error_code_of([&] { disambiguate(w.records[0], config(Channel::CNN_O, Setting::Gold, Fusion::Cca), res); }) ==
          ErrorCode::MissingResource);
}

TEST_CASE("no textual coverage falls back to the first sense")
{
    auto w = test::engineered_world(1);
    auto r = w.records[1];  // gold play.02
    r.objects_gold = {"zebra"};
    const auto p = disambiguate(r, config(Channel::O), w.resources());
    CHECK(p.predicted_sense_id == "play.01");
    CHECK(p.fallback == Fallback::NoCoverageFirstSense);

    r.objects_gold.clear();
    CHECK(disambiguate(r, config(Channel::O), w.resources()).fallback == Fallback::NoCoverageFirstSense);
}

TEST_CASE("non-depictable senses are not candidates")
{
    const SenseInventory inv = load_inventory(test::fixture("touch_inventory.json"));
    EmbeddingTable t(2);
    t.add("contact", vec({1, 0}));
    t.add("affect", vec({0, 1}));
    Resources res;
    res.inventory = &inv;
    res.embeddings = &t;
    ImageRecord r;
    r.image_id = "i";
    r.verb = "touch";
    r.gold_sense_id = "touch.01";
    r.objects_gold = {"contact"};
    const auto p = disambiguate(r, config(Channel::O), res);
    for (const auto& [id, score] : p.scores)
        CHECK((id == "touch.01" || id == "touch.03"));
}

TEST_CASE("prediction JSON round-trip")
{
    Prediction p{.image_id = "i", .verb = "v", .predicted_sense_id = "v.01", .scores = {{"v.01", 0.5}}};
    CHECK(prediction_from_json(prediction_to_json(p)) == p);
    CHECK(prediction_to_json(p)["fallback"].is_null());
    p.fallback = Fallback::NoCoverageFirstSense;
    CHECK(prediction_to_json(p)["fallback"] == "no_coverage_first_sense");
    CHECK(prediction_from_json(prediction_to_json(p)) == p);
}

TEST_CASE("lesk counts distinct shared definition tokens")
{
    const auto s = test::sense("x.01", "hit the ball with a bat", {"ball game"});
    const std::vector<std::string> ctx = {"ball", "ball", "bat", "game"};
    CHECK(lesk_overlap(ctx, s, default_stopwords()) == 2);
    CHECK(lesk_overlap(ctx, s, default_stopwords(), true) == 3);
    CHECK(lesk_overlap(std::vector<std::string>{}, s, default_stopwords()) == 0);

    const auto w = test::engineered_world(1);
    for (const auto& r : w.records)
        CHECK(lesk_disambiguate(r, w.inventory, default_stopwords()).predicted_sense_id == r.gold_sense_id);

    auto blank = w.records[1];
    blank.objects_gold.clear();
    blank.descriptions_gold.clear();
    CHECK(lesk_disambiguate(blank, w.inventory, default_stopwords()).predicted_sense_id == "play.01");
}

TEST_CASE("first sense and most frequent sense")
{
    const SenseInventory inv = load_inventory(test::fixture("touch_inventory.json"));
    CHECK(first_sense(inv, "touch") == "touch.01");
    CHECK(first_sense(inv, "touch", false) == "touch.01");
    CHECK(error_code_of([&] { first_sense(inv, "zzz"); }) == ErrorCode::UnknownVerb);

    const std::vector<std::pair<std::string, std::string>> ann = {
        {"touch", "touch.03"}, {"touch", "touch.03"}, {"touch", "touch.01"}, {"play", "play.02"}, {"play", "play.01"}};
    CHECK(most_frequent_sense(ann, "touch", inv) == "touch.03");
    CHECK(most_frequent_sense(ann, "play", inv) == "play.01");  // tie -> lower rank
    const std::vector<std::pair<std::string, std::string>> none;
    CHECK(error_code_of([&] { most_frequent_sense(none, "touch", inv); }) == ErrorCode::InsufficientData);
}
