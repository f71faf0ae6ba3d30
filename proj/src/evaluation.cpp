#include "vsd/evaluation.hpp"

#include "vsd/error.hpp"
#include "vsd/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace vsd {

using nlohmann::json;

std::vector<ImageRecord> parse_dataset(std::string_view text, const SenseInventory& inv)
{
    std::vector<ImageRecord> out;
    std::set<std::string, std::less<>> ids;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        const std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;

        const std::string where = "line " + std::to_string(line_no);
        ImageRecord rec;
        try {
            rec = record_from_json(json::parse(line));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Parse, where + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), where + ": " + e.detail());
        }
        if (!inv.contains(rec.verb))
            throw Error(ErrorCode::UnknownVerb, where + ": " + rec.verb);
        try {
            inv.sense(rec.verb, rec.gold_sense_id);
        } catch (const Error& e) {
            throw Error(e.code(), where + ": " + e.detail());
        }
        if (!ids.insert(rec.image_id).second)
            throw Error(ErrorCode::DuplicateId, where + ": image id " + rec.image_id);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<ImageRecord> load_dataset(const std::filesystem::path& path, const SenseInventory& inv)
{
    try {
        return parse_dataset(read_file(path), inv);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io)
            throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

void save_dataset(std::span<const ImageRecord> records, const std::filesystem::path& path)
{
    std::string out;
    for (const ImageRecord& r : records)
        out += record_to_json(r).dump() + "\n";
    write_file(path, out);
}

std::map<std::string, std::string, std::less<>> gold_map(std::span<const ImageRecord> records)
{
    std::map<std::string, std::string, std::less<>> gold;
    for (const ImageRecord& r : records)
        gold.emplace(r.image_id, r.gold_sense_id);
    return gold;
}

double accuracy(std::span<const Prediction> preds, const std::map<std::string, std::string, std::less<>>& gold)
{
    if (preds.empty())
        throw Error(ErrorCode::EmptyInput, "accuracy of an empty prediction list is undefined");
    std::size_t correct = 0;
    for (const Prediction& p : preds) {
        auto it = gold.find(p.image_id);
        if (it == gold.end())
            throw Error(ErrorCode::MissingKey, "no gold sense for image " + p.image_id);
        if (it->second == p.predicted_sense_id)
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::string_view to_string(ClassFilter f)
{
    switch (f) {
    case ClassFilter::Motion: return "motion";
    case ClassFilter::NonMotion: return "nonmotion";
    case ClassFilter::All: return "all";
    }
    return "?";
}

ClassFilter parse_class_filter(std::string_view s)
{
    if (s == "motion")
        return ClassFilter::Motion;
    if (s == "nonmotion" || s == "non-motion")
        return ClassFilter::NonMotion;
    if (s == "all")
        return ClassFilter::All;
    throw Error(ErrorCode::Validation, "unknown verb class \"" + std::string(s) + "\"");
}

std::vector<ImageRecord> filter_by_class(std::span<const ImageRecord> records, const SenseInventory& inv,
                                         ClassFilter filter)
{
    std::vector<ImageRecord> out;
    for (const ImageRecord& r : records) {
        const VerbClass cls = inv.verb_class(r.verb);
        if (filter == ClassFilter::All || (filter == ClassFilter::Motion) == (cls == VerbClass::Motion))
            out.push_back(r);
    }
    return out;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex mu;
    {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(mu);
                        if (!first)
                            first = std::current_exception();
                        failed = true;
                    }
                }
            });
    }
    if (first)
        std::rethrow_exception(first);
}

std::string cell_name(const GridCell& cell)
{
    std::string name(to_string(cell.channel));
    if (cell.fusion != Fusion::None)
        name += "/" + std::string(to_string(cell.fusion));
    return name;
}

std::vector<GridCell> full_grid()
{
    std::vector<GridCell> cells = {{Channel::O, Fusion::None},
                                   {Channel::C, Fusion::None},
                                   {Channel::O_C, Fusion::None},
                                   {Channel::CNN, Fusion::None}};
    for (Fusion f : {Fusion::Concat, Fusion::Cca})
        for (Channel c : {Channel::CNN_O, Channel::CNN_C, Channel::CNN_O_C})
            cells.push_back({c, f});
    return cells;
}

RepConfig GridSpec::config_for(const GridCell& cell) const
{
    RepConfig cfg = default_config(cell.channel, setting, cell.fusion);
    if (lambda_t)
        cfg.lambda_t = *lambda_t;
    if (lambda_c)
        cfg.lambda_c = *lambda_c;
    cfg.pred_threshold = pred_threshold;
    cfg.pooling = pooling;
    cfg.cca_combine = cca_combine;
    cfg.depictable_only = depictable_only;
    return cfg;
}

const CellResult* EvalReport::find(const GridCell& cell) const
{
    for (const CellResult& c : cells)
        if (c.cell == cell)
            return &c;
    return nullptr;
}

EvalReport run_grid(std::span<const ImageRecord> dataset, const Resources& res, const GridSpec& spec)
{
    if (!res.inventory)
        throw Error(ErrorCode::MissingResource, "sense inventory");
    const SenseInventory& inv = *res.inventory;
    const std::vector<ImageRecord> records = filter_by_class(dataset, inv, spec.verb_class);
    if (records.empty())
        throw Error(ErrorCode::InsufficientData, "no images for verb class " + std::string(to_string(spec.verb_class)));
    const auto gold = gold_map(records);

    EvalReport report;
    report.setting = spec.setting;
    report.verb_class = spec.verb_class;
    report.images = records.size();

    std::set<std::string> verbs;
    std::vector<std::pair<std::string, std::string>> annotations;
    for (const ImageRecord& r : records) {
        verbs.insert(r.verb);
        annotations.emplace_back(r.verb, r.gold_sense_id);
        if (inv.senses(r.verb, spec.depictable_only).size() < 2)
            ++report.single_candidate_images;
    }
    report.verbs = verbs.size();

    // Baselines.
    std::map<std::string, std::string> fs_by_verb, mfs_by_verb;
    for (const std::string& v : verbs) {
        fs_by_verb[v] = first_sense(inv, v, spec.depictable_only);
        mfs_by_verb[v] = most_frequent_sense(annotations, v, inv);
    }
    const StopwordSet& stop = res.embeddings ? res.embeddings->stopwords() : default_stopwords();
    std::size_t fs_hits = 0, mfs_hits = 0;
    std::vector<Prediction> lesk(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ImageRecord& r = records[i];
        fs_hits += fs_by_verb[r.verb] == r.gold_sense_id;
        mfs_hits += mfs_by_verb[r.verb] == r.gold_sense_id;
        lesk[i] = lesk_disambiguate(r, inv, stop, spec.depictable_only, spec.lesk_include_examples);
    }
    const auto n = static_cast<double>(records.size());
    report.fs = static_cast<double>(fs_hits) / n;
    report.mfs = static_cast<double>(mfs_hits) / n;
    report.lesk = accuracy(lesk, gold);

    const SenseRepCache cache = SenseRepCache::build(res);
    for (const GridCell& cell : spec.cells) {
        CellResult result{.cell = cell};
        try {
            const RepConfig cfg = spec.config_for(cell);
            cfg.validate();
            std::vector<Prediction> preds(records.size());
            parallel_for(records.size(), spec.jobs,
                         [&](std::size_t i) { preds[i] = disambiguate(records[i], cfg, res, &cache); });
            for (const Prediction& p : preds)
                result.fallbacks += p.fallback.has_value();
            result.accuracy = accuracy(preds, gold);
            result.predictions = std::move(preds);
        } catch (const Error& e) {
            result.absent_reason = e.what();
        }
        report.fallbacks += result.fallbacks;
        report.cells.push_back(std::move(result));
    }
    return report;
}

json report_to_json(const EvalReport& report)
{
    json rows = json::object();
    json absent = json::object();
    json fallbacks = json::object();
    for (const CellResult& c : report.cells) {
        const std::string name = cell_name(c.cell);
        if (c.accuracy) {
            rows[name] = *c.accuracy;
            fallbacks[name] = c.fallbacks;
        } else {
            absent[name] = c.absent_reason;
        }
    }
    return {{"setting", to_string(report.setting)},
            {"verb_class", to_string(report.verb_class)},
            {"rows", std::move(rows)},
            {"absent", std::move(absent)},
            {"baselines", {{"fs", report.fs}, {"mfs", report.mfs}, {"lesk", report.lesk}}},
            {"counts",
             {{"images", report.images},
              {"verbs", report.verbs},
              {"fallbacks", report.fallbacks},
              {"fallbacks_by_cell", std::move(fallbacks)},
              {"single_candidate_images", report.single_candidate_images}}}};
}

namespace {

std::string pct(std::optional<double> v)
{
    if (!v)
        return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *v);
    return buf;
}

}  // namespace

std::string render_report(const EvalReport& report)
{
    std::ostringstream out;
    out << "setting=" << to_string(report.setting) << " class=" << to_string(report.verb_class)
        << " images=" << report.images << " verbs=" << report.verbs << "\n";
    out << "FS: " << pct(report.fs) << "  MFS: " << pct(report.mfs) << "  Lesk: " << pct(report.lesk) << "\n";

    auto col = [&](Channel c, Fusion f) {
        const CellResult* r = report.find({c, f});
        return r ? pct(r->accuracy) : std::string("-");
    };
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %6s %6s %6s %6s |%8s %8s %8s |%8s %8s %8s\n", "", "O", "C", "O+C", "CNN",
                  "cat+O", "cat+C", "cat+O+C", "cca+O", "cca+C", "cca+O+C");
    out << line;
    std::snprintf(line, sizeof line, "%-8s %6s %6s %6s %6s |%8s %8s %8s |%8s %8s %8s\n",
                  std::string(to_string(report.setting)).c_str(), col(Channel::O, Fusion::None).c_str(),
                  col(Channel::C, Fusion::None).c_str(), col(Channel::O_C, Fusion::None).c_str(),
                  col(Channel::CNN, Fusion::None).c_str(), col(Channel::CNN_O, Fusion::Concat).c_str(),
                  col(Channel::CNN_C, Fusion::Concat).c_str(), col(Channel::CNN_O_C, Fusion::Concat).c_str(),
                  col(Channel::CNN_O, Fusion::Cca).c_str(), col(Channel::CNN_C, Fusion::Cca).c_str(),
                  col(Channel::CNN_O_C, Fusion::Cca).c_str());
    out << line;

    for (const CellResult& c : report.cells) {
        if (!c.accuracy)
            out << "absent " << cell_name(c.cell) << ": " << c.absent_reason << "\n";
        else if (c.fallbacks)
            out << "fallbacks " << cell_name(c.cell) << ": " << c.fallbacks << " (no coverage, first sense used)\n";
    }
    if (report.single_candidate_images)
        out << "images whose verb has fewer than two candidate senses: " << report.single_candidate_images << "\n";
    return out.str();
}

DenseVector supervised_features(const ImageRecord& rec, Channel channel, Setting setting, const Resources& res,
                                double pred_threshold)
{
    std::vector<DenseVector> blocks;
    if (uses_text(channel)) {
        if (!res.embeddings)
            throw Error(ErrorCode::MissingResource, "word embeddings");
        RepConfig cfg = default_config(channel, setting, Fusion::None);
        cfg.pred_threshold = pred_threshold;
        DenseVector text = DenseVector::Zero(static_cast<Eigen::Index>(res.embeddings->dim()));
        try {
            const DenseVector v = build_text_image_rep(rec, cfg, *res.embeddings);
            if (v.norm() > 0)
                text = v.normalized();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoCoverage && e.code() != ErrorCode::MissingResource)
                throw;
        }
        blocks.push_back(std::move(text));
    }
    if (uses_visual(channel)) {
        if (!res.image_features)
            throw Error(ErrorCode::MissingResource, "image features");
        DenseVector v = visual_image_rep(rec, *res.image_features);
        if (v.norm() > 0)
            v.normalize();
        blocks.push_back(std::move(v));
    }
    Eigen::Index dim = 0;
    for (const auto& b : blocks)
        dim += b.size();
    DenseVector out(dim);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        out.segment(at, b.size()) = b;
        at += b.size();
    }
    return out;
}

SupervisedReport run_supervised(std::span<const ImageRecord> dataset, const Resources& res,
                                const SupervisedSpec& spec)
{
    if (!res.inventory)
        throw Error(ErrorCode::MissingResource, "sense inventory");
    const SenseInventory& inv = *res.inventory;
    const auto in_class = filter_by_class(dataset, inv, spec.verb_class);

    SupervisedReport report;
    report.setting = spec.setting;
    report.verb_class = spec.verb_class;
    report.verbs = select_supervised_verbs(in_class, inv, spec.min_images);
    const std::set<std::string> selected(report.verbs.begin(), report.verbs.end());

    std::vector<ImageRecord> records;
    for (const ImageRecord& r : in_class)
        if (selected.contains(r.verb))
            records.push_back(r);
    report.images = records.size();
    if (records.empty())
        throw Error(ErrorCode::InsufficientData, "no verb qualifies for supervised training");

    std::vector<std::pair<std::string, std::string>> annotations;
    for (const ImageRecord& r : records)
        annotations.emplace_back(r.verb, r.gold_sense_id);
    std::size_t fs_hits = 0, mfs_hits = 0;
    for (const std::string& v : report.verbs) {
        const std::string fs = first_sense(inv, v);
        const std::string mfs = most_frequent_sense(annotations, v, inv);
        for (const ImageRecord& r : records)
            if (r.verb == v) {
                fs_hits += r.gold_sense_id == fs;
                mfs_hits += r.gold_sense_id == mfs;
            }
    }
    report.fs = static_cast<double>(fs_hits) / static_cast<double>(records.size());
    report.mfs = static_cast<double>(mfs_hits) / static_cast<double>(records.size());

    const TrainTestSplit split = split_train_test(records, spec.split_ratio, spec.split_seed);
    report.train_images = split.train.size();
    report.test_images = split.test.size();

    for (Channel channel : spec.channels) {
        SupervisedRow row{.channel = channel};
        try {
            std::vector<LrModel> models(report.verbs.size());
            std::vector<std::size_t> correct(report.verbs.size(), 0), total(report.verbs.size(), 0);
            parallel_for(report.verbs.size(), spec.jobs, [&](std::size_t vi) {
                const std::string& verb = report.verbs[vi];
                std::vector<const ImageRecord*> train, test;
                for (const ImageRecord& r : split.train)
                    if (r.verb == verb)
                        train.push_back(&r);
                for (const ImageRecord& r : split.test)
                    if (r.verb == verb)
                        test.push_back(&r);

                // Classes: senses seen in training, in rank order.
                std::set<std::string> seen;
                for (const ImageRecord* r : train)
                    seen.insert(r->gold_sense_id);
                std::vector<std::string> classes;
                for (const SenseEntry& s : inv.verb(verb).senses)
                    if (seen.contains(s.sense_id))
                        classes.push_back(s.sense_id);

                const DenseVector first = supervised_features(*train.front(), channel, spec.setting, res,
                                                              spec.pred_threshold);
                Matrix x(static_cast<Eigen::Index>(train.size()), first.size());
                std::vector<int> labels;
                for (std::size_t i = 0; i < train.size(); ++i) {
                    x.row(static_cast<Eigen::Index>(i)) =
                        supervised_features(*train[i], channel, spec.setting, res, spec.pred_threshold).transpose();
                    labels.push_back(static_cast<int>(
                        std::find(classes.begin(), classes.end(), train[i]->gold_sense_id) - classes.begin()));
                }
                LrTraining trained = train_lr(x, labels, classes, spec.params);
                trained.model.verb = verb;
                for (const ImageRecord* r : test) {
                    const auto p = predict_lr(trained.model,
                                              supervised_features(*r, channel, spec.setting, res, spec.pred_threshold));
                    correct[vi] += p.sense_id == r->gold_sense_id;
                    ++total[vi];
                }
                models[vi] = std::move(trained.model);
            });
            std::size_t c = 0, t = 0;
            for (std::size_t i = 0; i < correct.size(); ++i) {
                c += correct[i];
                t += total[i];
            }
            if (t == 0)
                throw Error(ErrorCode::InsufficientData, "empty test split");
            row.accuracy = static_cast<double>(c) / static_cast<double>(t);
            report.models[std::string(to_string(channel))] = std::move(models);
        } catch (const Error& e) {
            row.absent_reason = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

json supervised_report_to_json(const SupervisedReport& report)
{
    json rows = json::object();
    json absent = json::object();
    for (const SupervisedRow& r : report.rows) {
        if (r.accuracy)
            rows[std::string(to_string(r.channel))] = *r.accuracy;
        else
            absent[std::string(to_string(r.channel))] = r.absent_reason;
    }
    return {{"setting", to_string(report.setting)},
            {"verb_class", to_string(report.verb_class)},
            {"verbs", report.verbs},
            {"rows", std::move(rows)},
            {"absent", std::move(absent)},
            {"baselines", {{"fs", report.fs}, {"mfs", report.mfs}}},
            {"counts",
             {{"images", report.images}, {"train", report.train_images}, {"test", report.test_images}}}};
}

std::string render_supervised_report(const SupervisedReport& report)
{
    std::ostringstream out;
    out << "supervised setting=" << to_string(report.setting) << " class=" << to_string(report.verb_class)
        << " verbs=" << report.verbs.size() << " images=" << report.images << " (train " << report.train_images
        << ", test " << report.test_images << ")\n";
    out << "FS: " << pct(report.fs) << "  MFS: " << pct(report.mfs) << "\n";
    for (const SupervisedRow& r : report.rows) {
        out << "  " << to_string(r.channel) << ": " << pct(r.accuracy);
        if (!r.accuracy)
            out << "  (" << r.absent_reason << ")";
        out << "\n";
    }
    return out.str();
}

}  // namespace vsd
