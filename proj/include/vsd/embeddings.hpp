#pragma once

#include "vsd/vector.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace vsd {

using StopwordSet = std::unordered_set<std::string>;

// Bundled English function-word list used to keep only content words.
const StopwordSet& default_stopwords();

// token -> dense vector. Tokens are stored lowercased; every vector has
// exactly dim() entries.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dim, StopwordSet stopwords = default_stopwords());

    // Inserts or replaces. Token is lowercased; throws DimensionMismatch or NonFinite.
    void add(std::string_view token, DenseVector vec);

    const DenseVector* find(std::string_view token) const;
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    const StopwordSet& stopwords() const { return stopwords_; }

private:
    std::size_t dim_;
    std::unordered_map<std::string, DenseVector> vectors_;
    StopwordSet stopwords_;
};

// Text format: a "<count> <dim>" header line, then "<token> <f1> ... <fdim>" rows.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::string_view text);

std::string to_lower_ascii(std::string_view s);

// Lowercases, splits on anything that is not a letter or digit, drops
// tokens shorter than two characters and stopwords. Order is preserved and
// out-of-vocabulary tokens are kept.
std::vector<std::string> tokenize_content(std::string_view text, const StopwordSet& stopwords);
std::vector<std::string> tokenize_content(std::string_view text, const EmbeddingTable& table);

struct TextEmbedding {
    DenseVector vector;
    std::size_t coverage = 0;  // in-vocabulary tokens averaged
};

// Mean of the vectors of in-vocabulary tokens (a multiset: duplicates count).
// Throws NoCoverage when no token is in the table.
TextEmbedding embed_text(std::span<const std::string> tokens, const EmbeddingTable& table);

}  // namespace vsd
