#include "vsd/imagerep.hpp"

#include "vsd/error.hpp"

#include <cmath>
#include <optional>

namespace vsd {

using nlohmann::json;

std::string_view to_string(Channel c)
{
    switch (c) {
    case Channel::O: return "O";
    case Channel::C: return "C";
    case Channel::O_C: return "O+C";
    case Channel::CNN: return "CNN";
    case Channel::CNN_O: return "CNN+O";
    case Channel::CNN_C: return "CNN+C";
    case Channel::CNN_O_C: return "CNN+O+C";
    }
    return "?";
}

std::string_view to_string(Setting s)
{
    return s == Setting::Gold ? "gold" : "pred";
}

std::string_view to_string(Fusion f)
{
    switch (f) {
    case Fusion::None: return "none";
    case Fusion::Concat: return "concat";
    case Fusion::Cca: return "cca";
    }
    return "?";
}

Channel parse_channel(std::string_view s)
{
    std::string norm(s);
    for (char& ch : norm) {
        if (ch == '_')
            ch = '+';
        if (ch >= 'a' && ch <= 'z')
            ch = static_cast<char>(ch - 'a' + 'A');
    }
    for (Channel c : {Channel::O, Channel::C, Channel::O_C, Channel::CNN, Channel::CNN_O, Channel::CNN_C,
                      Channel::CNN_O_C})
        if (norm == to_string(c))
            return c;
    throw Error(ErrorCode::Validation, "unknown channel \"" + std::string(s) + "\"");
}

Setting parse_setting(std::string_view s)
{
    if (s == "gold" || s == "GOLD")
        return Setting::Gold;
    if (s == "pred" || s == "PRED")
        return Setting::Pred;
    throw Error(ErrorCode::Validation, "unknown setting \"" + std::string(s) + "\"");
}

Fusion parse_fusion(std::string_view s)
{
    if (s == "none")
        return Fusion::None;
    if (s == "concat")
        return Fusion::Concat;
    if (s == "cca")
        return Fusion::Cca;
    throw Error(ErrorCode::Validation, "unknown fusion \"" + std::string(s) + "\"");
}

bool uses_objects(Channel c)
{
    return c == Channel::O || c == Channel::O_C || c == Channel::CNN_O || c == Channel::CNN_O_C;
}

bool uses_descriptions(Channel c)
{
    return c == Channel::C || c == Channel::O_C || c == Channel::CNN_C || c == Channel::CNN_O_C;
}

bool uses_text(Channel c)
{
    return uses_objects(c) || uses_descriptions(c);
}

bool uses_visual(Channel c)
{
    return c == Channel::CNN || c == Channel::CNN_O || c == Channel::CNN_C || c == Channel::CNN_O_C;
}

void RepConfig::validate() const
{
    const bool multimodal = uses_text(channel) && uses_visual(channel);
    if (multimodal && fusion == Fusion::None)
        throw Error(ErrorCode::Validation, std::string(to_string(channel)) + " needs concat or cca fusion");
    if (!multimodal && fusion != Fusion::None)
        throw Error(ErrorCode::Validation,
                    std::string(to_string(channel)) + " is single-modality; fusion must be none");
    if (!std::isfinite(lambda_t) || !std::isfinite(lambda_c) || lambda_t < 0 || lambda_t > 1 || lambda_c < 0 ||
        lambda_c > 1)
        throw Error(ErrorCode::Validation, "interpolation weights must lie in [0, 1]");
    if (fusion == Fusion::Cca && std::abs(lambda_t + lambda_c - 1.0) > 1e-9)
        throw Error(ErrorCode::Validation, "lambda_t + lambda_c must equal 1 for cca fusion");
    if (!(pred_threshold >= 0 && pred_threshold <= 1))
        throw Error(ErrorCode::Validation, "object threshold must lie in [0, 1]");
}

RepConfig default_config(Channel channel, Setting setting, Fusion fusion)
{
    RepConfig cfg;
    cfg.channel = channel;
    cfg.setting = setting;
    cfg.fusion = fusion;
    if (setting == Setting::Pred) {
        cfg.lambda_t = 0.3;
        cfg.lambda_c = 0.7;
    }
    return cfg;
}

std::vector<std::string> filter_pred_objects(std::span<const ScoredLabel> labels, double threshold)
{
    std::vector<std::string> out;
    for (const ScoredLabel& l : labels)
        if (l.score > threshold)
            out.push_back(l.label);
    return out;
}

ImageTokens image_tokens(const ImageRecord& rec, const RepConfig& cfg, const StopwordSet& stopwords)
{
    ImageTokens out;
    auto append = [&](std::vector<std::string>& dst, const std::string& text) {
        auto toks = tokenize_content(text, stopwords);
        dst.insert(dst.end(), std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
    };
    if (uses_objects(cfg.channel)) {
        const auto labels =
            cfg.setting == Setting::Gold ? rec.objects_gold : filter_pred_objects(rec.objects_pred, cfg.pred_threshold);
        for (const std::string& l : labels)
            append(out.objects, l);
    }
    if (uses_descriptions(cfg.channel)) {
        const auto& descs = cfg.setting == Setting::Gold ? rec.descriptions_gold : rec.descriptions_pred;
        for (const std::string& d : descs)
            append(out.descriptions, d);
    }
    return out;
}

DenseVector build_text_image_rep(const ImageRecord& rec, const RepConfig& cfg, const EmbeddingTable& table)
{
    if (!uses_text(cfg.channel))
        throw Error(ErrorCode::Validation, std::string(to_string(cfg.channel)) + " has no textual part");

    const bool gold = cfg.setting == Setting::Gold;
    const bool have_objects = uses_objects(cfg.channel) && !(gold ? rec.objects_gold.empty() : rec.objects_pred.empty());
    const bool have_descs =
        uses_descriptions(cfg.channel) && !(gold ? rec.descriptions_gold.empty() : rec.descriptions_pred.empty());
    if (!have_objects && !have_descs)
        throw Error(ErrorCode::MissingResource, "image " + rec.image_id + " has no " +
                                                    std::string(to_string(cfg.setting)) + " annotations for " +
                                                    std::string(to_string(cfg.channel)));

    const ImageTokens toks = image_tokens(rec, cfg, table.stopwords());
    const bool both = uses_objects(cfg.channel) && uses_descriptions(cfg.channel);
    if (both && cfg.pooling == TextPooling::Blend) {
        std::optional<DenseVector> o, c;
        try {
            o = embed_text(toks.objects, table).vector;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoCoverage)
                throw;
        }
        try {
            c = embed_text(toks.descriptions, table).vector;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoCoverage)
                throw;
        }
        if (o && c)
            return 0.5 * (*o + *c);
        if (o || c)
            return o ? *o : *c;
        throw Error(ErrorCode::NoCoverage, "image " + rec.image_id);
    }

    std::vector<std::string> pool = toks.objects;
    pool.insert(pool.end(), toks.descriptions.begin(), toks.descriptions.end());
    try {
        return embed_text(pool, table).vector;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoCoverage)
            throw;
        throw Error(ErrorCode::NoCoverage, "image " + rec.image_id + ": " + e.detail());
    }
}

DenseVector visual_image_rep(const ImageRecord& rec, const FeatureStore& store)
{
    return store.vector(rec.image_id);
}

namespace {

std::string str_field(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw Error(ErrorCode::Parse, std::string(key) + ": expected a string");
    return it->get<std::string>();
}

std::vector<std::string> str_list(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return {};
    if (!it->is_array())
        throw Error(ErrorCode::Parse, std::string(key) + ": expected an array of strings");
    std::vector<std::string> out;
    for (const json& x : *it) {
        if (!x.is_string())
            throw Error(ErrorCode::Parse, std::string(key) + ": expected an array of strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

ScoredLabel scored_label(const json& x, const char* key)
{
    ScoredLabel l;
    if (x.is_array() && x.size() == 2 && x[0].is_string() && x[1].is_number()) {
        l.label = x[0].get<std::string>();
        l.score = x[1].get<double>();
    } else if (x.is_object() && x.contains("label") && x["label"].is_string()) {
        l.label = x["label"].get<std::string>();
        if (x.contains("score")) {
            if (!x["score"].is_number())
                throw Error(ErrorCode::Parse, std::string(key) + ": score must be a number");
            l.score = x["score"].get<double>();
        }
    } else {
        throw Error(ErrorCode::Parse, std::string(key) + ": expected [label, score] or {\"label\", \"score\"}");
    }
    if (!std::isfinite(l.score) || l.score < 0 || l.score > 1)
        throw Error(ErrorCode::Validation, std::string(key) + ": score of \"" + l.label + "\" outside [0, 1]");
    return l;
}

}  // namespace

ImageRecord record_from_json(const json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::Parse, "record must be a JSON object");
    ImageRecord rec;
    rec.image_id = str_field(j, "image_id");
    rec.verb = str_field(j, "verb");
    rec.gold_sense_id = str_field(j, "gold_sense_id");
    const std::string src = str_field(j, "source_dataset");
    if (src == "coco")
        rec.source_dataset = SourceDataset::Coco;
    else if (src == "tuhoi")
        rec.source_dataset = SourceDataset::Tuhoi;
    else
        throw Error(ErrorCode::Parse, "source_dataset: expected \"coco\" or \"tuhoi\"");

    if (auto it = j.find("objects_gold"); it != j.end() && !it->is_null()) {
        if (!it->is_array())
            throw Error(ErrorCode::Parse, "objects_gold: expected an array");
        for (const json& x : *it)
            rec.objects_gold.push_back(x.is_string() ? x.get<std::string>() : scored_label(x, "objects_gold").label);
    }
    if (auto it = j.find("objects_pred"); it != j.end() && !it->is_null()) {
        if (!it->is_array())
            throw Error(ErrorCode::Parse, "objects_pred: expected an array");
        for (const json& x : *it)
            rec.objects_pred.push_back(scored_label(x, "objects_pred"));
    }
    rec.descriptions_gold = str_list(j, "descriptions_gold");
    rec.descriptions_pred = str_list(j, "descriptions_pred");
    return rec;
}

json record_to_json(const ImageRecord& rec)
{
    json pred = json::array();
    for (const ScoredLabel& l : rec.objects_pred)
        pred.push_back(json::array({l.label, l.score}));
    return {{"image_id", rec.image_id},
            {"verb", rec.verb},
            {"gold_sense_id", rec.gold_sense_id},
            {"source_dataset", rec.source_dataset == SourceDataset::Coco ? "coco" : "tuhoi"},
            {"objects_gold", rec.objects_gold},
            {"objects_pred", std::move(pred)},
            {"descriptions_gold", rec.descriptions_gold},
            {"descriptions_pred", rec.descriptions_pred}};
}

}  // namespace vsd
