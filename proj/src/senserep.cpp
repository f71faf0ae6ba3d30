#include "vsd/senserep.hpp"

#include "vsd/error.hpp"

namespace vsd {

std::vector<std::string> sense_tokens(const SenseEntry& sense, const StopwordSet& stopwords)
{
    std::vector<std::string> tokens = tokenize_content(sense.definition, stopwords);
    for (const std::string& ex : sense.examples) {
        auto more = tokenize_content(ex, stopwords);
        tokens.insert(tokens.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    return tokens;
}

DenseVector build_text_sense_rep(const SenseEntry& sense, const EmbeddingTable& table)
{
    const auto tokens = sense_tokens(sense, table.stopwords());
    try {
        return embed_text(tokens, table).vector;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoCoverage)
            throw;
        throw Error(ErrorCode::NoCoverage, "sense " + sense.sense_id + ": " + e.detail());
    }
}

DenseVector build_visual_sense_rep(std::string_view sense_id, const SenseImageManifest& manifest,
                                   const FeatureStore& store)
{
    auto it = manifest.find(sense_id);
    if (it == manifest.end() || it->second.empty())
        throw Error(ErrorCode::MissingKey, "sense " + std::string(sense_id) + " has no images in the manifest");
    std::vector<DenseVector> vectors;
    vectors.reserve(it->second.size());
    for (const std::string& key : it->second)
        vectors.push_back(store.vector(key));
    return mean_pool(vectors);
}

SenseRepSet build_sense_reps(const SenseEntry& sense, const EmbeddingTable* table,
                             const SenseImageManifest* manifest, const FeatureStore* store)
{
    SenseRepSet out{.sense_id = sense.sense_id};
    std::optional<Error> first_error;
    if (table) {
        try {
            const auto tokens = sense_tokens(sense, table->stopwords());
            auto emb = embed_text(tokens, *table);
            out.text = std::move(emb.vector);
            out.text_coverage = emb.coverage;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoCoverage)
                throw;
            first_error = Error(e.code(), "sense " + sense.sense_id + ": " + e.detail());
        }
    }
    if (manifest && store) {
        try {
            out.visual = build_visual_sense_rep(sense.sense_id, *manifest, *store);
            out.image_count = manifest->find(sense.sense_id)->second.size();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MissingKey)
                throw;
            if (!first_error)
                first_error = e;
        }
    }
    if (!out.text && !out.visual) {
        if (first_error)
            throw *first_error;
        throw Error(ErrorCode::MissingResource, "no embeddings or sense images supplied for " + sense.sense_id);
    }
    return out;
}

}  // namespace vsd
