#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli.hpp"
#include "engineered.hpp"
#include "test_support.hpp"
#include "vsd/cca.hpp"
#include "vsd/evaluation.hpp"
#include "vsd/io.hpp"

#include <sstream>

using namespace vsd;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string embeddings_text(const EmbeddingTable& t, const std::vector<std::string>& words)
{
    std::ostringstream s;
    s << words.size() << " " << t.dim() << "\n";
    for (const auto& w : words) {
        s << w;
        for (double x : *t.find(w))
            s << " " << x;
        s << "\n";
    }
    return s.str();
}

// The engineered world written out in every on-disk format the CLI reads.
struct WorldFiles {
    test::TempDir dir;
    test::EngineeredWorld world = test::engineered_world(10);

    WorldFiles()
    {
        save_inventory(world.inventory, dir / "inventory.json");
        save_dataset(world.records, dir / "dataset.jsonl");
        write_feature_file(world.image_features, dir / "images.vsdf");
        write_feature_file(world.sense_features, dir / "senses.vsdf");
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [id, keys] : world.manifest)
            m[id] = keys;
        write_file(dir / "manifest.json", m.dump());
        write_file(dir / "embeddings.txt",
                   embeddings_text(world.embeddings, {"ball", "sport", "guitar", "music", "horse", "animal",
                                                      "bicycle", "wheel", "knife", "food", "scissors", "paper"}));

        // CCA pair files: O+C gold text of each image against its features.
        FeatureStore text(12);
        const auto cfg = default_config(Channel::O_C, Setting::Gold, Fusion::None);
        for (const auto& r : world.records) {
            const DenseVector v = build_text_image_rep(r, cfg, world.embeddings);
            text.insert(r.image_id, std::vector<float>(v.begin(), v.end()));
        }
        write_feature_file(text, dir / "pairs_text.vsdf");
    }

    std::string p(const std::string& name) const { return (dir / name).string(); }

    std::vector<std::string> base(const std::string& cmd) const
    {
        return {cmd, "--inventory", p("inventory.json"), "--dataset", p("dataset.jsonl")};
    }
    std::vector<std::string> with_resources(const std::string& cmd) const
    {
        auto a = base(cmd);
        a.insert(a.end(), {"--embeddings", p("embeddings.txt"), "--features", p("images.vsdf"), "--sense-features",
                           p("senses.vsdf"), "--manifest", p("manifest.json")});
        return a;
    }
};

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("evaluate writes a report and exits 0")
{
    WorldFiles f;
    const auto r = run(f.with_resources("evaluate") + std::vector<std::string>{"--setting", "gold", "--class", "motion",
                                                                              "--channels", "O,C,O+C,CNN", "--report",
                                                                              f.p("report.json")});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(read_file(f.dir / "report.json"));
    CHECK(j["rows"].size() == 4);
    CHECK(j["rows"]["O+C"] == 1.0);
    CHECK(j["counts"]["images"] == 40);
    CHECK(r.out.find("MFS") != std::string::npos);
    CHECK(r.err.find("sha256=") != std::string::npos);
    CHECK(r.err.find("# config") != std::string::npos);
}

TEST_CASE("evaluate is reproducible byte for byte")
{
    WorldFiles f;
    const auto args = f.with_resources("evaluate") + std::vector<std::string>{"--jobs", "3"};
    REQUIRE(run(args + std::vector<std::string>{"--report", f.p("a.json")}).code == 0);
    REQUIRE(run(args + std::vector<std::string>{"--report", f.p("b.json")}).code == 0);
    CHECK(read_file(f.dir / "a.json") == read_file(f.dir / "b.json"));
}

TEST_CASE("usage errors exit 2")
{
    WorldFiles f;
    CHECK(run({"evaluate", "--dataset", f.p("dataset.jsonl")}).code == cli::kExitUsage);
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run(f.base("evaluate") + std::vector<std::string>{"--channels", "XYZ"}).code == cli::kExitUsage);
    CHECK(run(f.base("evaluate") + std::vector<std::string>{"--lambda-t", "0.4", "--lambda-c", "0.4"}).code ==
          cli::kExitUsage);
    CHECK(run(f.base("evaluate") + std::vector<std::string>{"--setting", "silver"}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("resource errors exit 1")
{
    WorldFiles f;
    CHECK(run({"evaluate", "--inventory", f.p("nope.json"), "--dataset", f.p("dataset.jsonl")}).code ==
          cli::kExitResource);
    write_file(f.dir / "broken.jsonl", "{not json\n");
    CHECK(run({"evaluate", "--inventory", f.p("inventory.json"), "--dataset", f.p("broken.jsonl")}).code ==
          cli::kExitResource);
    CHECK(run(f.with_resources("disambiguate") + std::vector<std::string>{"--image", "nope", "--verb", "play"}).code ==
          cli::kExitResource);
}

TEST_CASE("disambiguate prints the sense and per-sense scores")
{
    WorldFiles f;
    const auto r = run(f.with_resources("disambiguate") +
                       std::vector<std::string>{"--image", "play.02_0", "--verb", "play", "--channel", "O"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("predicted play.02\n"));
    CHECK(r.out.find("play.01") != std::string::npos);

    const auto j = run(f.with_resources("disambiguate") +
                       std::vector<std::string>{"--image", "ride.01_3", "--verb", "ride", "--channel", "CNN+O+C",
                                                "--json"});
    REQUIRE(j.code == 0);
    const auto pred = prediction_from_json(nlohmann::json::parse(j.out));
    CHECK(pred.predicted_sense_id == "ride.01");
    CHECK(pred.scores.size() == 2);
}

TEST_CASE("build-senses writes representation files")
{
    WorldFiles f;
    const auto r = run({"build-senses", "--inventory", f.p("inventory.json"), "--embeddings", f.p("embeddings.txt"),
                        "--manifest", f.p("manifest.json"), "--sense-features", f.p("senses.vsdf"), "--out-text",
                        f.p("text.vsdf"), "--out-visual", f.p("visual.vsdf")});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto text = read_feature_file(f.dir / "text.vsdf");
    CHECK(text.size() == 6);
    CHECK(text.contains("cut/cut.02"));
    CHECK(read_feature_file(f.dir / "visual.vsdf").dim() == 6);
    CHECK(run({"build-senses", "--inventory", f.p("inventory.json")}).code == cli::kExitUsage);
}

TEST_CASE("fit-cca then evaluate the cca cells")
{
    WorldFiles f;
    const auto fit = run({"fit-cca", "--text", f.p("pairs_text.vsdf"), "--visual", f.p("images.vsdf"), "--n", "4",
                          "--seed", "7", "--out", f.p("cca.bin")});
    INFO(fit.err);
    REQUIRE(fit.code == 0);
    CHECK(fit.out.find("train 48, dev 6, test 6") != std::string::npos);
    CHECK(fit.err.find("# seed 7") != std::string::npos);
    const auto model = load_cca(f.dir / "cca.bin");
    CHECK(model.n == 4);
    CHECK(model.seed == 7);

    const auto eval = run(f.with_resources("evaluate") +
                          std::vector<std::string>{"--cca", f.p("cca.bin"), "--channels", "CNN+O+C/cca", "--report",
                                                   f.p("cca.json")});
    REQUIRE(eval.code == 0);
    const auto j = nlohmann::json::parse(read_file(f.dir / "cca.json"));
    CHECK(j["rows"].contains("CNN+O+C/cca"));

    // n larger than the visual dimension cannot be fitted
    CHECK(run({"fit-cca", "--text", f.p("pairs_text.vsdf"), "--visual", f.p("images.vsdf"), "--n", "128", "--out",
               f.p("big.bin")})
              .code == cli::kExitResource);
}

TEST_CASE("train-supervised writes models and a report")
{
    WorldFiles f;
    const auto r = run(f.with_resources("train-supervised") +
                       std::vector<std::string>{"--channels", "O,CNN", "--out-dir", f.p("models"), "--report",
                                                f.p("sup.json"), "--seed", "3"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(f.dir / "models" / "CNN" / "play.lr"));
    const auto j = nlohmann::json::parse(read_file(f.dir / "sup.json"));
    CHECK(j["rows"]["O"] == 1.0);
}
