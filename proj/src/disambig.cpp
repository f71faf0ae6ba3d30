#include "vsd/disambig.hpp"

#include "vsd/error.hpp"

#include <algorithm>
#include <set>

namespace vsd {

using nlohmann::json;

json prediction_to_json(const Prediction& p)
{
    json j = {{"image_id", p.image_id},
              {"verb", p.verb},
              {"predicted_sense_id", p.predicted_sense_id},
              {"scores", p.scores}};
    j["fallback"] = p.fallback ? json("no_coverage_first_sense") : json(nullptr);
    return j;
}

Prediction prediction_from_json(const json& j)
{
    try {
        Prediction p;
        p.image_id = j.at("image_id").get<std::string>();
        p.verb = j.at("verb").get<std::string>();
        p.predicted_sense_id = j.at("predicted_sense_id").get<std::string>();
        p.scores = j.at("scores").get<std::map<std::string, double>>();
        if (auto it = j.find("fallback"); it != j.end() && !it->is_null()) {
            if (*it != "no_coverage_first_sense")
                throw Error(ErrorCode::Parse, "unknown fallback " + it->dump());
            p.fallback = Fallback::NoCoverageFirstSense;
        }
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("prediction: ") + e.what());
    }
}

double score_dot(const DenseVector& image_rep, const DenseVector& sense_rep)
{
    require_same_dim(image_rep, sense_rep, "image and sense representations");
    return normalized(image_rep).dot(normalized(sense_rep));
}

namespace {

std::string cache_key(std::string_view verb, std::string_view sense_id)
{
    std::string key(verb);
    key += '/';
    key += sense_id;
    return key;
}

void require(const void* p, const char* what)
{
    if (!p)
        throw Error(ErrorCode::MissingResource, what);
}

void require_resources(const RepConfig& cfg, const Resources& res)
{
    require(res.inventory, "sense inventory");
    if (uses_text(cfg.channel))
        require(res.embeddings, "word embeddings");
    if (uses_visual(cfg.channel)) {
        require(res.image_features, "image features");
        require(res.manifest, "sense image manifest");
        require(res.sense_features, "sense image features");
    }
    if (cfg.fusion == Fusion::Cca)
        require(res.cca, "CCA model");
}

DenseVector combine(const DenseVector* text, const DenseVector* visual, const RepConfig& cfg, const Resources& res)
{
    switch (cfg.fusion) {
    case Fusion::None:
        return text ? *text : *visual;
    case Fusion::Concat:
        return fuse_concat(*text, *visual);
    case Fusion::Cca: {
        const DenseVector t = project(*res.cca, *text, View::Text);
        const DenseVector c = project(*res.cca, *visual, View::Visual);
        if (cfg.cca_combine == CcaCombine::Concat)
            return fuse_concat(t, c);
        return fuse_interpolate(t, c, cfg.lambda_t, cfg.lambda_c);
    }
    }
    throw Error(ErrorCode::Validation, "unknown fusion");
}

}  // namespace

SenseRepCache SenseRepCache::build(const Resources& res)
{
    require(res.inventory, "sense inventory");
    SenseRepCache cache;
    const FeatureStore* store = res.sense_features;
    for (const std::string& verb : res.inventory->verbs()) {
        for (const SenseEntry& s : res.inventory->verb(verb).senses) {
            try {
                cache.insert(verb, build_sense_reps(s, res.embeddings, res.manifest, store));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoCoverage && e.code() != ErrorCode::MissingKey &&
                    e.code() != ErrorCode::MissingResource)
                    throw;
            }
        }
    }
    return cache;
}

const SenseRepSet* SenseRepCache::find(std::string_view verb, std::string_view sense_id) const
{
    auto it = reps_.find(cache_key(verb, sense_id));
    return it == reps_.end() ? nullptr : &it->second;
}

void SenseRepCache::insert(std::string_view verb, SenseRepSet reps)
{
    const std::string key = cache_key(verb, reps.sense_id);
    reps_.insert_or_assign(key, std::move(reps));
}

std::optional<std::size_t> select_sense(const DenseVector& image_rep, std::span<const Candidate> candidates,
                                        std::map<std::string, double>& scores)
{
    const DenseVector unit = normalized(image_rep);
    std::optional<std::size_t> best;
    double best_score = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Candidate& c = candidates[i];
        require_same_dim(image_rep, c.rep, "image and sense representations");
        const double norm = c.rep.norm();
        if (norm == 0.0)
            continue;
        const double s = unit.dot(c.rep / norm);
        scores[c.sense_id] = s;
        const bool better = !best || s > best_score ||
                            (s == best_score && c.rank < candidates[*best].rank);
        if (better) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

DenseVector image_representation(const ImageRecord& rec, const RepConfig& cfg, const Resources& res)
{
    std::optional<DenseVector> text, visual;
    if (uses_text(cfg.channel)) {
        require(res.embeddings, "word embeddings");
        text = build_text_image_rep(rec, cfg, *res.embeddings);
    }
    if (uses_visual(cfg.channel)) {
        require(res.image_features, "image features");
        visual = visual_image_rep(rec, *res.image_features);
    }
    return combine(text ? &*text : nullptr, visual ? &*visual : nullptr, cfg, res);
}

std::optional<DenseVector> sense_representation(const SenseRepSet& reps, const RepConfig& cfg, const Resources& res)
{
    if (uses_text(cfg.channel) && !reps.text)
        return std::nullopt;
    if (uses_visual(cfg.channel) && !reps.visual)
        return std::nullopt;
    const DenseVector* text = uses_text(cfg.channel) ? &*reps.text : nullptr;
    const DenseVector* visual = uses_visual(cfg.channel) ? &*reps.visual : nullptr;
    try {
        return combine(text, visual, cfg, res);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroNorm)
            return std::nullopt;
        throw;
    }
}

Prediction disambiguate(const ImageRecord& rec, const RepConfig& cfg, const Resources& res, const SenseRepCache* cache)
{
    cfg.validate();
    require_resources(cfg, res);
    const SenseInventory& inv = *res.inventory;

    std::vector<SenseEntry> senses = inv.senses(rec.verb, cfg.depictable_only);
    if (senses.empty())
        senses = inv.senses(rec.verb, false);

    Prediction pred{.image_id = rec.image_id, .verb = rec.verb};
    auto fall_back = [&] {
        pred.predicted_sense_id = senses.front().sense_id;
        pred.fallback = Fallback::NoCoverageFirstSense;
        return pred;
    };

    DenseVector image_rep;
    try {
        image_rep = image_representation(rec, cfg, res);
        if (image_rep.norm() == 0.0)
            return fall_back();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoCoverage || e.code() == ErrorCode::ZeroNorm ||
            (e.code() == ErrorCode::MissingResource && uses_text(cfg.channel)))
            return fall_back();
        throw;
    }

    std::vector<Candidate> candidates;
    for (const SenseEntry& s : senses) {
        std::optional<SenseRepSet> built;
        const SenseRepSet* reps = cache ? cache->find(rec.verb, s.sense_id) : nullptr;
        if (!cache) {
            try {
                built = build_sense_reps(s, uses_text(cfg.channel) ? res.embeddings : nullptr,
                                         uses_visual(cfg.channel) ? res.manifest : nullptr,
                                         uses_visual(cfg.channel) ? res.sense_features : nullptr);
                reps = &*built;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoCoverage && e.code() != ErrorCode::MissingKey)
                    throw;
            }
        }
        if (!reps)
            continue;
        if (auto rep = sense_representation(*reps, cfg, res))
            candidates.push_back({s.sense_id, s.rank, std::move(*rep)});
    }

    const auto best = select_sense(image_rep, candidates, pred.scores);
    if (!best)
        return fall_back();
    pred.predicted_sense_id = candidates[*best].sense_id;
    return pred;
}

int lesk_overlap(std::span<const std::string> context, const SenseEntry& sense, const StopwordSet& stopwords,
                 bool include_examples)
{
    const std::set<std::string> ctx(context.begin(), context.end());
    std::vector<std::string> def_tokens = tokenize_content(sense.definition, stopwords);
    if (include_examples)
        for (const std::string& ex : sense.examples) {
            auto more = tokenize_content(ex, stopwords);
            def_tokens.insert(def_tokens.end(), more.begin(), more.end());
        }
    const std::set<std::string> def(def_tokens.begin(), def_tokens.end());
    int overlap = 0;
    for (const std::string& t : def)
        if (ctx.contains(t))
            ++overlap;
    return overlap;
}

std::vector<std::string> lesk_context(const ImageRecord& rec, const StopwordSet& stopwords)
{
    std::vector<std::string> out;
    for (const std::string& l : rec.objects_gold) {
        auto toks = tokenize_content(l, stopwords);
        out.insert(out.end(), toks.begin(), toks.end());
    }
    for (const std::string& d : rec.descriptions_gold) {
        auto toks = tokenize_content(d, stopwords);
        out.insert(out.end(), toks.begin(), toks.end());
    }
    return out;
}

Prediction lesk_disambiguate(const ImageRecord& rec, const SenseInventory& inv, const StopwordSet& stopwords,
                             bool depictable_only, bool include_examples)
{
    std::vector<SenseEntry> senses = inv.senses(rec.verb, depictable_only);
    if (senses.empty())
        senses = inv.senses(rec.verb, false);
    const auto context = lesk_context(rec, stopwords);

    Prediction pred{.image_id = rec.image_id, .verb = rec.verb};
    int best = -1;
    for (const SenseEntry& s : senses) {
        const int overlap = lesk_overlap(context, s, stopwords, include_examples);
        pred.scores[s.sense_id] = overlap;
        // Senses arrive in rank order, so a strict comparison keeps the lowest rank on ties.
        if (overlap > best) {
            best = overlap;
            pred.predicted_sense_id = s.sense_id;
        }
    }
    return pred;
}

std::string first_sense(const SenseInventory& inv, std::string_view verb, bool depictable_only)
{
    const auto senses = inv.senses(verb, depictable_only);
    if (!senses.empty())
        return senses.front().sense_id;
    return inv.verb(verb).senses.front().sense_id;
}

std::string most_frequent_sense(std::span<const std::pair<std::string, std::string>> annotations,
                                std::string_view verb, const SenseInventory& inv)
{
    std::map<std::string, int> counts;
    for (const auto& [v, s] : annotations)
        if (v == verb)
            ++counts[s];
    if (counts.empty())
        throw Error(ErrorCode::InsufficientData, "no annotations for verb " + std::string(verb));

    const std::string* best = nullptr;
    int best_count = 0;
    int best_rank = 0;
    for (const auto& [sense_id, count] : counts) {
        const int rank = inv.sense(verb, sense_id).rank;
        if (!best || count > best_count || (count == best_count && rank < best_rank)) {
            best = &sense_id;
            best_count = count;
            best_rank = rank;
        }
    }
    return *best;
}

}  // namespace vsd
