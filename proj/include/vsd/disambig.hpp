#pragma once

#include "vsd/cca.hpp"
#include "vsd/embeddings.hpp"
#include "vsd/features.hpp"
#include "vsd/imagerep.hpp"
#include "vsd/inventory.hpp"
#include "vsd/senserep.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vsd {

enum class Fallback { NoCoverageFirstSense };

struct Prediction {
    std::string image_id;
    std::string verb;
    std::string predicted_sense_id;
    std::map<std::string, double> scores;
    std::optional<Fallback> fallback;

    bool operator==(const Prediction&) const = default;
};

nlohmann::json prediction_to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& j);

// Cosine similarity: the dot product of the two length-normalized vectors.
// Throws DimensionMismatch or ZeroNorm.
double score_dot(const DenseVector& image_rep, const DenseVector& sense_rep);

// Everything the disambiguator may need. Pointers that a configuration does
// not use may stay null; a configuration that needs a null one throws
// MissingResource.
struct Resources {
    const SenseInventory* inventory = nullptr;
    const EmbeddingTable* embeddings = nullptr;
    const FeatureStore* image_features = nullptr;
    const SenseImageManifest* manifest = nullptr;
    const FeatureStore* sense_features = nullptr;
    const CcaModel* cca = nullptr;
};

// Sense representations keyed by "<verb>/<sense_id>", built once and shared
// across images. Senses whose representation could not be built are absent.
class SenseRepCache {
public:
    static SenseRepCache build(const Resources& res);

    const SenseRepSet* find(std::string_view verb, std::string_view sense_id) const;
    void insert(std::string_view verb, SenseRepSet reps);
    std::size_t size() const { return reps_.size(); }

private:
    std::map<std::string, SenseRepSet, std::less<>> reps_;
};

struct Candidate {
    std::string sense_id;
    int rank = 1;
    DenseVector rep;
};

// argmax over cosine scores; ties go to the lowest rank. Candidates whose
// representation has zero norm are left unscored. Returns the winning index
// into `candidates` (nullopt if none could be scored) and fills `scores`.
std::optional<std::size_t> select_sense(const DenseVector& image_rep, std::span<const Candidate> candidates,
                                        std::map<std::string, double>& scores);

// Builds the image representation for cfg (text, visual, or fused).
// Throws NoCoverage / MissingResource / ZeroNorm when the image side cannot
// be represented; disambiguate() turns those into a first-sense fallback.
DenseVector image_representation(const ImageRecord& rec, const RepConfig& cfg, const Resources& res);

// The matching sense representation for cfg, or nullopt if the sense lacks
// a required part.
std::optional<DenseVector> sense_representation(const SenseRepSet& reps, const RepConfig& cfg, const Resources& res);

// Scores every candidate sense of rec.verb against the image under cfg and
// returns the best one. When the image side has no usable text, or no sense
// could be scored, predicts the first sense and sets the fallback flag.
Prediction disambiguate(const ImageRecord& rec, const RepConfig& cfg, const Resources& res,
                        const SenseRepCache* cache = nullptr);

// Number of distinct tokens shared by the context and the sense's definition
// (plus its examples when include_examples is set).
int lesk_overlap(std::span<const std::string> context, const SenseEntry& sense, const StopwordSet& stopwords,
                 bool include_examples = false);

// Gold object-label tokens followed by gold description tokens.
std::vector<std::string> lesk_context(const ImageRecord& rec, const StopwordSet& stopwords);

Prediction lesk_disambiguate(const ImageRecord& rec, const SenseInventory& inv, const StopwordSet& stopwords,
                             bool depictable_only = true, bool include_examples = false);

// Rank-1 sense among the candidates in effect. When depictable_only leaves
// no candidate, the overall first sense is returned. Throws UnknownVerb.
std::string first_sense(const SenseInventory& inv, std::string_view verb, bool depictable_only = true);

// Modal gold sense of `verb` in `annotations` (verb, gold sense) pairs; ties
// go to the lowest rank. Throws InsufficientData when the verb has none.
std::string most_frequent_sense(std::span<const std::pair<std::string, std::string>> annotations,
                                std::string_view verb, const SenseInventory& inv);

}  // namespace vsd
