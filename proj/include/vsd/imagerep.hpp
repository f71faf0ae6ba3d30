#pragma once

#include "vsd/embeddings.hpp"
#include "vsd/features.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace vsd {

enum class SourceDataset { Coco, Tuhoi };

struct ScoredLabel {
    std::string label;
    double score = 1.0;

    bool operator==(const ScoredLabel&) const = default;
};

// One dataset item: an image paired with a verb and its annotated sense.
struct ImageRecord {
    std::string image_id;
    std::string verb;
    std::string gold_sense_id;
    SourceDataset source_dataset = SourceDataset::Coco;
    std::vector<std::string> objects_gold;
    std::vector<ScoredLabel> objects_pred;
    std::vector<std::string> descriptions_gold;
    std::vector<std::string> descriptions_pred;

    bool operator==(const ImageRecord&) const = default;
};

nlohmann::json record_to_json(const ImageRecord& rec);
// Gold objects may be plain strings or scored labels; predicted objects are
// [label, score] pairs or {"label", "score"} objects. Throws Parse.
ImageRecord record_from_json(const nlohmann::json& j);

// O = object labels, C = descriptions, CNN = image features.
enum class Channel { O, C, O_C, CNN, CNN_O, CNN_C, CNN_O_C };
enum class Setting { Gold, Pred };
enum class Fusion { None, Concat, Cca };
// How O+C text is formed: one pooled token average, or the mean of the O and C averages.
enum class TextPooling { Pool, Blend };
// How the two projected CCA views are combined.
enum class CcaCombine { Interpolate, Concat };

std::string_view to_string(Channel c);
std::string_view to_string(Setting s);
std::string_view to_string(Fusion f);
Channel parse_channel(std::string_view s);  // accepts "O+C" and "O_C" spellings
Setting parse_setting(std::string_view s);
Fusion parse_fusion(std::string_view s);

bool uses_text(Channel c);
bool uses_visual(Channel c);
bool uses_objects(Channel c);
bool uses_descriptions(Channel c);

struct RepConfig {
    Channel channel = Channel::O;
    Setting setting = Setting::Gold;
    Fusion fusion = Fusion::None;
    double lambda_t = 0.5;
    double lambda_c = 0.5;
    double pred_threshold = 0.2;
    TextPooling pooling = TextPooling::Pool;
    CcaCombine cca_combine = CcaCombine::Interpolate;
    bool depictable_only = true;

    // Throws Validation on inconsistent combinations.
    void validate() const;
};

// Best-performing weights per setting: (0.5, 0.5) for GOLD, (0.3, 0.7) for PRED.
RepConfig default_config(Channel channel, Setting setting, Fusion fusion);

// Labels whose score is strictly above `threshold`, order preserved.
std::vector<std::string> filter_pred_objects(std::span<const ScoredLabel> labels, double threshold);

struct ImageTokens {
    std::vector<std::string> objects;
    std::vector<std::string> descriptions;
};

// Content tokens of the object labels and descriptions selected by the
// channel and setting (multiset semantics, duplicates kept).
ImageTokens image_tokens(const ImageRecord& rec, const RepConfig& cfg, const StopwordSet& stopwords);

// Mean embedding of the image's textual annotations. Throws
// MissingResource when the record has no annotations for the requested side
// and NoCoverage when nothing is in the vocabulary.
DenseVector build_text_image_rep(const ImageRecord& rec, const RepConfig& cfg, const EmbeddingTable& table);

// The stored feature vector of the image. Throws MissingKey.
DenseVector visual_image_rep(const ImageRecord& rec, const FeatureStore& store);

}  // namespace vsd
