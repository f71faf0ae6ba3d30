#pragma once

#include "vsd/embeddings.hpp"
#include "vsd/features.hpp"
#include "vsd/inventory.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace vsd {

// Per-sense representations. `fused` is only filled once a fusion step ran.
struct SenseRepSet {
    std::string sense_id;
    std::optional<DenseVector> text;
    std::optional<DenseVector> visual;
    std::optional<DenseVector> fused;
    std::size_t text_coverage = 0;
    std::size_t image_count = 0;
};

// Content tokens of the definition followed by those of every example, as
// one pool (definition and examples weigh the same per token).
std::vector<std::string> sense_tokens(const SenseEntry& sense, const StopwordSet& stopwords);

// Mean embedding over sense_tokens(). Throws NoCoverage.
DenseVector build_text_sense_rep(const SenseEntry& sense, const EmbeddingTable& table);

// Mean of the feature vectors listed for `sense_id` in the manifest.
// Throws MissingKey if the sense is absent, its list is empty, or an image
// key is not in the store.
DenseVector build_visual_sense_rep(std::string_view sense_id, const SenseImageManifest& manifest,
                                   const FeatureStore& store);

// Builds whatever each side's resources allow. Throws NoCoverage /
// MissingKey only when neither side could be built.
SenseRepSet build_sense_reps(const SenseEntry& sense, const EmbeddingTable* table,
                             const SenseImageManifest* manifest, const FeatureStore* store);

}  // namespace vsd
