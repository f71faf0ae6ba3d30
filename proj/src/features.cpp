#include "vsd/features.hpp"

#include "binary.hpp"
#include "vsd/error.hpp"
#include "vsd/io.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

namespace vsd {

namespace {
constexpr std::string_view kMagic = "VSDF";
constexpr std::uint32_t kVersion = 1;
}  // namespace

FeatureStore::FeatureStore(std::size_t dim) : dim_(dim)
{
    if (dim == 0 || dim > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::Validation, "feature dimension must be in [1, 2^32)");
}

void FeatureStore::insert(std::string key, std::vector<float> values)
{
    if (values.size() != dim_)
        throw Error(ErrorCode::DimensionMismatch, "key \"" + key + "\" has " + std::to_string(values.size()) +
                                                      " values, store dim is " + std::to_string(dim_));
    for (float f : values)
        if (!std::isfinite(f))
            throw Error(ErrorCode::NonFinite, "key \"" + key + "\"");
    if (key.size() > 0xFFFF)
        throw Error(ErrorCode::Validation, "key longer than 65535 bytes");
    if (entries_.contains(key))
        throw Error(ErrorCode::DuplicateId, "key \"" + key + "\"");
    entries_.emplace(std::move(key), std::move(values));
}

bool FeatureStore::contains(std::string_view key) const
{
    return entries_.find(key) != entries_.end();
}

std::span<const float> FeatureStore::raw(std::string_view key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw Error(ErrorCode::MissingKey, "\"" + std::string(key) + "\" not in feature store");
    return it->second;
}

DenseVector FeatureStore::vector(std::string_view key) const
{
    const auto values = raw(key);
    DenseVector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = values[i];
    return v;
}

std::vector<std::string> FeatureStore::keys() const
{
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [k, _] : entries_)
        out.push_back(k);
    return out;
}

std::string encode_features(const FeatureStore& store)
{
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.uint<std::uint32_t>(kVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(store.dim()));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(store.size()));
    for (const std::string& key : store.keys()) {
        w.str16(key);
        for (float f : store.raw(key))
            w.f32(f);
    }
    return w.data();
}

FeatureStore decode_features(std::string_view bytes)
{
    detail::ByteReader r(bytes);
    if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic)
        throw Error(ErrorCode::BadMagic, "not a VSDF feature file");
    const auto version = r.uint<std::uint32_t>();
    if (version != kVersion)
        throw Error(ErrorCode::Validation, "unsupported VSDF version " + std::to_string(version));
    const auto dim = r.uint<std::uint32_t>();
    const auto count = r.uint<std::uint32_t>();

    FeatureStore store(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string key = r.str16();
        std::vector<float> values(dim);
        for (float& f : values)
            f = r.f32();
        store.insert(std::move(key), std::move(values));
    }
    if (!r.at_end())
        throw Error(ErrorCode::Validation, std::to_string(r.remaining()) + " trailing bytes after last record");
    return store;
}

FeatureStore read_feature_file(const std::filesystem::path& path)
{
    try {
        return decode_features(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io)
            throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

void write_feature_file(const FeatureStore& store, const std::filesystem::path& path)
{
    write_file(path, encode_features(store));
}

DenseVector mean_pool(std::span<const DenseVector> vectors)
{
    if (vectors.empty())
        throw Error(ErrorCode::EmptyInput, "mean_pool over no vectors");
    DenseVector sum = DenseVector::Zero(vectors.front().size());
    for (const DenseVector& v : vectors) {
        require_same_dim(sum, v, "mean_pool inputs");
        sum += v;
    }
    return sum / static_cast<double>(vectors.size());
}

SenseImageManifest parse_manifest(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    if (!doc.is_object())
        throw Error(ErrorCode::Parse, "manifest must be an object of sense id -> image key list");
    SenseImageManifest out;
    for (const auto& [sense, keys] : doc.items()) {
        if (!keys.is_array())
            throw Error(ErrorCode::Parse, "manifest." + sense + ": expected an array");
        auto& list = out[sense];
        for (const auto& k : keys) {
            if (!k.is_string())
                throw Error(ErrorCode::Parse, "manifest." + sense + ": image keys must be strings");
            list.push_back(k.get<std::string>());
        }
    }
    return out;
}

SenseImageManifest load_manifest(const std::filesystem::path& path)
{
    try {
        return parse_manifest(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io)
            throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

}  // namespace vsd
