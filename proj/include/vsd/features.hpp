#pragma once

#include "vsd/vector.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsd {

// Keyed dense f32 vectors of one uniform dimension (image fc7-style features,
// or any other per-key vectors written in the same container).
class FeatureStore {
public:
    explicit FeatureStore(std::size_t dim);

    // Throws DimensionMismatch, NonFinite or DuplicateId.
    void insert(std::string key, std::vector<float> values);

    bool contains(std::string_view key) const;
    // Raw stored floats. Throws MissingKey.
    std::span<const float> raw(std::string_view key) const;
    // Stored floats widened to double. Throws MissingKey.
    DenseVector vector(std::string_view key) const;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    // Keys in lexicographic order.
    std::vector<std::string> keys() const;

    bool operator==(const FeatureStore&) const = default;

private:
    std::size_t dim_;
    std::map<std::string, std::vector<float>, std::less<>> entries_;
};

std::string encode_features(const FeatureStore& store);
FeatureStore decode_features(std::string_view bytes);

FeatureStore read_feature_file(const std::filesystem::path& path);
void write_feature_file(const FeatureStore& store, const std::filesystem::path& path);

// Elementwise mean. Throws EmptyInput or DimensionMismatch.
DenseVector mean_pool(std::span<const DenseVector> vectors);

// sense_id -> image keys, from `{"<sense_id>": ["<image_key>", ...]}`.
using SenseImageManifest = std::map<std::string, std::vector<std::string>, std::less<>>;

SenseImageManifest parse_manifest(std::string_view text);
SenseImageManifest load_manifest(const std::filesystem::path& path);

}  // namespace vsd
