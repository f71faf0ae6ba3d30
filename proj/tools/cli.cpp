#include "cli.hpp"

#include "vsd/cca.hpp"
#include "vsd/disambig.hpp"
#include "vsd/error.hpp"
#include "vsd/evaluation.hpp"
#include "vsd/io.hpp"
#include "vsd/senserep.hpp"
#include "vsd/supervised.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsd::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A flag value that parsed but makes no sense; reported as a usage error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Paths {
    std::string inventory, dataset, embeddings, features, sense_features, manifest, cca;
};

struct Common {
    Paths paths;
    std::string setting = "gold";
    std::string verb_class = "all";
    std::optional<double> lambda_t, lambda_c;
    double threshold = 0.2;
    TextPooling pooling = TextPooling::Pool;
    CcaCombine cca_combine = CcaCombine::Interpolate;
    bool all_senses = false;
    unsigned jobs = 1;
    std::uint64_t seed = 13;
    std::string report;
};

const std::map<std::string, TextPooling> kPooling = {{"pool", TextPooling::Pool}, {"blend", TextPooling::Blend}};
const std::map<std::string, CcaCombine> kCombine = {{"interpolate", CcaCombine::Interpolate},
                                                    {"concat", CcaCombine::Concat}};

// Logs the SHA-256 of a resource file before it is used.
class Log {
public:
    explicit Log(std::ostream& err) : err_(err) {}

    void resource(const std::string& role, const std::string& path)
    {
        err_ << "# resource " << role << " sha256=" << file_sha256(path) << " " << path << "\n";
    }
    void seed(std::uint64_t s) { err_ << "# seed " << s << "\n"; }
    void config(const json& j) { err_ << "# config " << j.dump() << "\n"; }

private:
    std::ostream& err_;
};

struct Loaded {
    std::optional<SenseInventory> inventory;
    std::optional<EmbeddingTable> embeddings;
    std::optional<FeatureStore> features;
    std::optional<FeatureStore> sense_features;
    std::optional<SenseImageManifest> manifest;
    std::optional<CcaModel> cca;
    std::vector<ImageRecord> dataset;

    Resources resources() const
    {
        Resources r;
        r.inventory = inventory ? &*inventory : nullptr;
        r.embeddings = embeddings ? &*embeddings : nullptr;
        r.image_features = features ? &*features : nullptr;
        r.sense_features = sense_features ? &*sense_features : nullptr;
        r.manifest = manifest ? &*manifest : nullptr;
        r.cca = cca ? &*cca : nullptr;
        return r;
    }
};

Loaded load(const Paths& p, Log& log)
{
    Loaded l;
    if (!p.inventory.empty()) {
        log.resource("inventory", p.inventory);
        l.inventory = load_inventory(p.inventory);
    }
    if (!p.embeddings.empty()) {
        log.resource("embeddings", p.embeddings);
        l.embeddings = load_embeddings(p.embeddings);
    }
    if (!p.features.empty()) {
        log.resource("features", p.features);
        l.features = read_feature_file(p.features);
    }
    if (!p.sense_features.empty()) {
        log.resource("sense-features", p.sense_features);
        l.sense_features = read_feature_file(p.sense_features);
    }
    if (!p.manifest.empty()) {
        log.resource("manifest", p.manifest);
        l.manifest = load_manifest(p.manifest);
    }
    if (!p.cca.empty()) {
        log.resource("cca", p.cca);
        l.cca = load_cca(p.cca);
    }
    if (!p.dataset.empty()) {
        log.resource("dataset", p.dataset);
        l.dataset = load_dataset(p.dataset, *l.inventory);
    }
    return l;
}

// Fills whichever weight is missing so that the pair sums to one.
std::pair<std::optional<double>, std::optional<double>> resolve_lambdas(const Common& c)
{
    auto t = c.lambda_t, v = c.lambda_c;
    if (t && !v)
        v = 1.0 - *t;
    else if (v && !t)
        t = 1.0 - *v;
    if (t && (std::abs(*t + *v - 1.0) > 1e-9 || *t < 0 || *v < 0))
        throw UsageError("--lambda-t and --lambda-c must be non-negative and sum to 1");
    return {t, v};
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty())
            out.push_back(item);
    return out;
}

// "O", "CNN+O/concat", or a bare multimodal channel meaning both fusions.
std::vector<GridCell> parse_cells(const std::string& spec)
{
    if (spec.empty())
        return full_grid();
    std::vector<GridCell> cells;
    for (const std::string& item : split_list(spec)) {
        try {
            const auto slash = item.find('/');
            const Channel ch = parse_channel(item.substr(0, slash));
            if (slash != std::string::npos)
                cells.push_back({ch, parse_fusion(item.substr(slash + 1))});
            else if (uses_text(ch) && uses_visual(ch))
                cells.insert(cells.end(), {{ch, Fusion::Concat}, {ch, Fusion::Cca}});
            else
                cells.push_back({ch, Fusion::None});
        } catch (const Error& e) {
            throw UsageError("--channels: " + e.detail());
        }
    }
    return cells;
}

Setting setting_of(const Common& c)
{
    try {
        return parse_setting(c.setting);
    } catch (const Error& e) {
        throw UsageError("--setting: " + e.detail());
    }
}

ClassFilter class_of(const Common& c)
{
    try {
        return parse_class_filter(c.verb_class);
    } catch (const Error& e) {
        throw UsageError("--class: " + e.detail());
    }
}

void add_rep_options(CLI::App* sub, Common& c)
{
    sub->add_option("--setting", c.setting, "gold or pred annotations")->capture_default_str();
    sub->add_option("--lambda-t", c.lambda_t, "weight of the text view under cca fusion");
    sub->add_option("--lambda-c", c.lambda_c, "weight of the visual view under cca fusion");
    sub->add_option("--threshold", c.threshold, "predicted object labels need a score above this")
        ->capture_default_str();
    sub->add_option("--pooling", c.pooling, "O+C text: pool tokens or blend the O and C averages")
        ->transform(CLI::CheckedTransformer(kPooling, CLI::ignore_case));
    sub->add_option("--cca-combine", c.cca_combine, "how projected views are combined")
        ->transform(CLI::CheckedTransformer(kCombine, CLI::ignore_case));
    sub->add_flag("--all-senses", c.all_senses, "also score non-depictable senses");
}

void add_resource_options(CLI::App* sub, Paths& p)
{
    sub->add_option("--embeddings", p.embeddings, "word embeddings (text format)");
    sub->add_option("--features", p.features, "image features (VSDF)");
    sub->add_option("--sense-features", p.sense_features, "features of the sense images (VSDF)");
    sub->add_option("--manifest", p.manifest, "sense id -> sense image keys (JSON)");
    sub->add_option("--cca", p.cca, "fitted CCA model");
}

void write_json(const std::string& path, const json& j)
{
    if (!path.empty())
        write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_build_senses(const Common& c, const std::string& out_text, const std::string& out_visual, std::ostream& out,
                     Log& log)
{
    if (out_text.empty() && out_visual.empty())
        throw UsageError("build-senses needs --out-text and/or --out-visual");
    if (!out_text.empty() && c.paths.embeddings.empty())
        throw UsageError("--out-text needs --embeddings");
    if (!out_visual.empty() && (c.paths.manifest.empty() || c.paths.sense_features.empty()))
        throw UsageError("--out-visual needs --manifest and --sense-features");
    const Loaded l = load(c.paths, log);
    log.config({{"command", "build-senses"}, {"depictable_only", !c.all_senses}});

    std::optional<FeatureStore> text, visual;
    if (!out_text.empty())
        text.emplace(l.embeddings->dim());
    std::size_t skipped_text = 0, skipped_visual = 0, senses = 0;
    for (const std::string& verb : l.inventory->verbs())
        for (const SenseEntry& s : l.inventory->senses(verb, !c.all_senses)) {
            ++senses;
            const std::string key = verb + "/" + s.sense_id;
            if (text) {
                try {
                    const DenseVector v = build_text_sense_rep(s, *l.embeddings);
                    text->insert(key, std::vector<float>(v.begin(), v.end()));
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NoCoverage)
                        throw;
                    ++skipped_text;
                }
            }
            if (!out_visual.empty()) {
                try {
                    const DenseVector v = build_visual_sense_rep(s.sense_id, *l.manifest, *l.sense_features);
                    if (!visual)
                        visual.emplace(static_cast<std::size_t>(v.size()));
                    visual->insert(key, std::vector<float>(v.begin(), v.end()));
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::MissingKey)
                        throw;
                    ++skipped_visual;
                }
            }
        }

    out << "senses: " << senses << "\n";
    if (text) {
        write_feature_file(*text, out_text);
        out << "text representations: " << text->size() << " written, " << skipped_text
            << " without coverage -> " << out_text << "\n";
    }
    if (!out_visual.empty()) {
        if (!visual)
            visual.emplace(l.sense_features->dim());
        write_feature_file(*visual, out_visual);
        out << "visual representations: " << visual->size() << " written, " << skipped_visual
            << " without images -> " << out_visual << "\n";
    }
    return kExitOk;
}

// Mean per-component Pearson correlation of projected held-out pairs.
double heldout_correlation(const CcaModel& m, const FeatureStore& t, const FeatureStore& v,
                           std::span<const std::string> keys)
{
    Matrix pt(static_cast<Eigen::Index>(keys.size()), m.n), pc(pt.rows(), m.n);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        pt.row(static_cast<Eigen::Index>(i)) = project(m, t.vector(keys[i]), View::Text).transpose();
        pc.row(static_cast<Eigen::Index>(i)) = project(m, v.vector(keys[i]), View::Visual).transpose();
    }
    double sum = 0;
    for (Eigen::Index k = 0; k < m.n; ++k) {
        const DenseVector a = pt.col(k).array() - pt.col(k).mean();
        const DenseVector b = pc.col(k).array() - pc.col(k).mean();
        const double denom = std::sqrt(a.squaredNorm() * b.squaredNorm());
        sum += denom > 0 ? a.dot(b) / denom : 0.0;
    }
    return sum / m.n;
}

int cmd_fit_cca(const std::string& text_path, const std::string& visual_path, const std::string& out_path, int n,
                double ridge, std::uint64_t seed, std::ostream& out, Log& log)
{
    if (n < 1)
        throw UsageError("--n must be positive");
    if (!(ridge > 0))
        throw UsageError("--ridge must be positive");
    log.resource("text-view", text_path);
    const FeatureStore text = read_feature_file(text_path);
    log.resource("visual-view", visual_path);
    const FeatureStore visual = read_feature_file(visual_path);
    log.seed(seed);
    log.config({{"command", "fit-cca"}, {"n", n}, {"ridge", ridge}, {"split", {0.8, 0.1, 0.1}}});

    std::vector<std::string> keys = text.keys();
    if (keys != visual.keys())
        throw Error(ErrorCode::Validation, "the two pair files must hold the same keys");
    std::mt19937_64 rng(seed);
    std::shuffle(keys.begin(), keys.end(), rng);
    const std::size_t n_train = keys.size() * 8 / 10;
    const std::size_t n_dev = keys.size() / 10;
    const std::span<const std::string> all(keys);
    const auto train = all.first(n_train);
    const auto dev = all.subspan(n_train, n_dev);
    const auto test = all.subspan(n_train + n_dev);

    Matrix t(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(text.dim()));
    Matrix v(t.rows(), static_cast<Eigen::Index>(visual.dim()));
    for (std::size_t i = 0; i < train.size(); ++i) {
        t.row(static_cast<Eigen::Index>(i)) = text.vector(train[i]).transpose();
        v.row(static_cast<Eigen::Index>(i)) = visual.vector(train[i]).transpose();
    }
    CcaModel model = fit_cca(t, v, n, ridge);
    model.seed = seed;
    save_cca(model, out_path);

    out << "pairs: " << keys.size() << " (train " << train.size() << ", dev " << dev.size() << ", test "
        << test.size() << ")\n";
    out << "leading correlations:";
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(5, model.n); ++k)
        out << " " << std::fixed << std::setprecision(4) << model.correlations[k];
    out << "\n";
    if (dev.size() >= 3)
        out << "dev mean correlation: " << heldout_correlation(model, text, visual, dev) << "\n";
    if (test.size() >= 3)
        out << "test mean correlation: " << heldout_correlation(model, text, visual, test) << "\n";
    out << "model -> " << out_path << "\n";
    return kExitOk;
}

int cmd_disambiguate(const Common& c, const std::string& image, const std::string& verb, const std::string& channel,
                     std::optional<std::string> fusion, bool as_json, std::ostream& out, Log& log)
{
    Channel ch;
    try {
        ch = parse_channel(channel);
    } catch (const Error& e) {
        throw UsageError("--channel: " + e.detail());
    }
    Fusion fu = uses_text(ch) && uses_visual(ch) ? Fusion::Concat : Fusion::None;
    if (fusion) {
        try {
            fu = parse_fusion(*fusion);
        } catch (const Error& e) {
            throw UsageError("--fusion: " + e.detail());
        }
    }
    RepConfig cfg = default_config(ch, setting_of(c), fu);
    const auto [lt, lc] = resolve_lambdas(c);
    if (lt) {
        cfg.lambda_t = *lt;
        cfg.lambda_c = *lc;
    }
    cfg.pred_threshold = c.threshold;
    cfg.pooling = c.pooling;
    cfg.cca_combine = c.cca_combine;
    cfg.depictable_only = !c.all_senses;
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.detail());
    }

    const Loaded l = load(c.paths, log);
    log.config({{"command", "disambiguate"},
                {"image", image},
                {"verb", verb},
                {"channel", to_string(cfg.channel)},
                {"setting", to_string(cfg.setting)},
                {"fusion", to_string(cfg.fusion)},
                {"lambda_t", cfg.lambda_t},
                {"lambda_c", cfg.lambda_c},
                {"threshold", cfg.pred_threshold},
                {"depictable_only", cfg.depictable_only}});

    const auto it = std::find_if(l.dataset.begin(), l.dataset.end(),
                                 [&](const ImageRecord& r) { return r.image_id == image; });
    if (it == l.dataset.end())
        throw Error(ErrorCode::MissingKey, "image " + image + " is not in the dataset");
    ImageRecord rec = *it;
    l.inventory->verb(verb);  // throws UnknownVerb
    rec.verb = verb;

    const Prediction p = disambiguate(rec, cfg, l.resources());
    if (as_json) {
        out << prediction_to_json(p).dump(2) << "\n";
        return kExitOk;
    }
    out << "predicted " << p.predicted_sense_id;
    if (p.fallback)
        out << " (no coverage, first sense)";
    out << "\n";
    for (const auto& [id, score] : p.scores)
        out << "  " << id << " " << std::fixed << std::setprecision(6) << score << "\n";
    return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& channels, bool lesk_examples, std::ostream& out, Log& log)
{
    GridSpec spec;
    spec.setting = setting_of(c);
    spec.verb_class = class_of(c);
    spec.cells = parse_cells(channels);
    std::tie(spec.lambda_t, spec.lambda_c) = resolve_lambdas(c);
    spec.pred_threshold = c.threshold;
    spec.pooling = c.pooling;
    spec.cca_combine = c.cca_combine;
    spec.depictable_only = !c.all_senses;
    spec.lesk_include_examples = lesk_examples;
    spec.jobs = c.jobs;

    const Loaded l = load(c.paths, log);
    json cells = json::array();
    for (const GridCell& cell : spec.cells)
        cells.push_back(cell_name(cell));
    const RepConfig probe = spec.config_for({Channel::CNN_O, Fusion::Cca});
    log.config({{"command", "evaluate"},
                {"setting", to_string(spec.setting)},
                {"class", to_string(spec.verb_class)},
                {"cells", cells},
                {"lambda_t", probe.lambda_t},
                {"lambda_c", probe.lambda_c},
                {"threshold", spec.pred_threshold},
                {"pooling", spec.pooling == TextPooling::Pool ? "pool" : "blend"},
                {"cca_combine", spec.cca_combine == CcaCombine::Interpolate ? "interpolate" : "concat"},
                {"depictable_only", spec.depictable_only},
                {"lesk_include_examples", spec.lesk_include_examples}});

    const EvalReport report = run_grid(l.dataset, l.resources(), spec);
    write_json(c.report, report_to_json(report));
    out << render_report(report);
    if (!c.report.empty())
        out << "report -> " << c.report << "\n";
    return kExitOk;
}

int cmd_train_supervised(const Common& c, const std::string& channels, const std::string& out_dir, LrParams params,
                         std::size_t min_images, std::ostream& out, Log& log)
{
    SupervisedSpec spec;
    spec.setting = setting_of(c);
    spec.verb_class = class_of(c);
    if (!channels.empty()) {
        spec.channels.clear();
        for (const std::string& s : split_list(channels)) {
            try {
                spec.channels.push_back(parse_channel(s));
            } catch (const Error& e) {
                throw UsageError("--channels: " + e.detail());
            }
        }
    }
    params.seed = c.seed;
    spec.params = params;
    spec.split_seed = c.seed;
    spec.min_images = min_images;
    spec.pred_threshold = c.threshold;
    spec.jobs = c.jobs;

    const Loaded l = load(c.paths, log);
    log.seed(c.seed);
    json chans = json::array();
    for (Channel ch : spec.channels)
        chans.push_back(to_string(ch));
    log.config({{"command", "train-supervised"},
                {"setting", to_string(spec.setting)},
                {"class", to_string(spec.verb_class)},
                {"channels", chans},
                {"l2", params.l2},
                {"epochs", params.epochs},
                {"learning_rate", params.learning_rate},
                {"split", spec.split_ratio},
                {"min_images", spec.min_images},
                {"threshold", spec.pred_threshold}});

    const SupervisedReport report = run_supervised(l.dataset, l.resources(), spec);
    if (!out_dir.empty())
        for (const auto& [channel, models] : report.models) {
            const fs::path dir = fs::path(out_dir) / channel;
            fs::create_directories(dir);
            for (const LrModel& m : models)
                save_lr(m, dir / (m.verb + ".lr"));
        }
    write_json(c.report, supervised_report_to_json(report));
    out << render_supervised_report(report);
    if (!out_dir.empty())
        out << "models -> " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Visual verb sense disambiguation"};
    app.require_subcommand(1);

    Common c;
    std::string out_text, out_visual;
    std::string text_view, visual_view, model_out;
    int n = 128;
    double ridge = 1e-3;
    std::string image, verb, channel = "O+C";
    std::optional<std::string> fusion;
    bool as_json = false;
    std::string channels;
    bool lesk_examples = false;
    std::string model_dir;
    LrParams lr;
    std::size_t min_images = 20;

    auto* build = app.add_subcommand("build-senses", "compute sense representations from an inventory");
    build->add_option("--inventory", c.paths.inventory)->required();
    add_resource_options(build, c.paths);
    build->add_option("--out-text", out_text, "VSDF of textual sense representations");
    build->add_option("--out-visual", out_visual, "VSDF of visual sense representations");
    build->add_flag("--all-senses", c.all_senses, "include non-depictable senses");

    auto* fit = app.add_subcommand("fit-cca", "fit CCA on a text/visual pair file");
    fit->add_option("--text", text_view, "text view (VSDF)")->required();
    fit->add_option("--visual", visual_view, "visual view (VSDF), same keys")->required();
    fit->add_option("--out", model_out, "model output path")->required();
    fit->add_option("--n", n, "latent dimension")->capture_default_str();
    fit->add_option("--ridge", ridge, "added to both covariance diagonals")->capture_default_str();
    fit->add_option("--seed", c.seed, "80/10/10 split seed")->capture_default_str();

    auto* dis = app.add_subcommand("disambiguate", "predict the sense of one image");
    dis->add_option("--inventory", c.paths.inventory)->required();
    dis->add_option("--dataset", c.paths.dataset, "dataset JSONL holding the image")->required();
    add_resource_options(dis, c.paths);
    dis->add_option("--image", image)->required();
    dis->add_option("--verb", verb)->required();
    dis->add_option("--channel", channel, "O, C, O+C, CNN, CNN+O, CNN+C or CNN+O+C")->capture_default_str();
    dis->add_option("--fusion", fusion, "none, concat or cca");
    dis->add_flag("--json", as_json, "print the prediction as JSON");
    add_rep_options(dis, c);

    auto* eval = app.add_subcommand("evaluate", "run the unsupervised grid and baselines");
    eval->add_option("--inventory", c.paths.inventory)->required();
    eval->add_option("--dataset", c.paths.dataset)->required();
    add_resource_options(eval, c.paths);
    eval->add_option("--class", c.verb_class, "motion, nonmotion or all")->capture_default_str();
    eval->add_option("--channels", channels, "comma-separated cells, e.g. O,C,CNN+O/concat (default: all)");
    eval->add_option("--report", c.report, "report JSON output path");
    eval->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    eval->add_flag("--lesk-examples", lesk_examples, "Lesk also reads the sense examples");
    add_rep_options(eval, c);

    auto* sup = app.add_subcommand("train-supervised", "train and test per-verb logistic regression");
    sup->add_option("--inventory", c.paths.inventory)->required();
    sup->add_option("--dataset", c.paths.dataset)->required();
    add_resource_options(sup, c.paths);
    sup->add_option("--setting", c.setting)->capture_default_str();
    sup->add_option("--class", c.verb_class)->capture_default_str();
    sup->add_option("--channels", channels, "comma-separated channels (default: all seven)");
    sup->add_option("--threshold", c.threshold)->capture_default_str();
    sup->add_option("--seed", c.seed, "split and initialization seed")->capture_default_str();
    sup->add_option("--min-images", min_images)->capture_default_str();
    sup->add_option("--epochs", lr.epochs)->capture_default_str();
    sup->add_option("--l2", lr.l2)->capture_default_str();
    sup->add_option("--learning-rate", lr.learning_rate)->capture_default_str();
    sup->add_option("--out-dir", model_dir, "directory for the trained models");
    sup->add_option("--report", c.report, "report JSON output path");
    sup->add_option("--jobs", c.jobs)->check(CLI::PositiveNumber)->capture_default_str();

    std::vector<const char*> argv = {"vsd"};
    for (const std::string& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    Log log(err);
    try {
        if (*build)
            return cmd_build_senses(c, out_text, out_visual, out, log);
        if (*fit)
            return cmd_fit_cca(text_view, visual_view, model_out, n, ridge, c.seed, out, log);
        if (*dis)
            return cmd_disambiguate(c, image, verb, channel, fusion, as_json, out, log);
        if (*eval)
            return cmd_evaluate(c, channels, lesk_examples, out, log);
        return cmd_train_supervised(c, channels, model_dir, lr, min_images, out, log);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitResource;
    }
}

}  // namespace vsd::cli
