#include "vsd/embeddings.hpp"

#include "vsd/error.hpp"
#include "vsd/io.hpp"

#include <charconv>

namespace vsd {

const StopwordSet& default_stopwords()
{
    static const StopwordSet words = {
        "a",       "about",   "above",  "after",    "again",  "against", "all",     "am",     "an",
        "and",     "any",     "are",    "as",       "at",     "be",      "because", "been",   "before",
        "being",   "below",   "between", "both",    "but",    "by",      "can",     "could",  "did",
        "do",      "does",    "doing",  "down",     "during", "each",    "etc",     "few",    "for",
        "from",    "further", "had",    "has",      "have",   "having",  "he",      "her",    "here",
        "hers",    "herself", "him",    "himself",  "his",    "how",     "i",       "if",     "in",
        "into",    "is",      "it",     "its",      "itself", "just",    "me",      "might",  "more",
        "most",    "must",    "my",     "myself",   "no",     "nor",     "not",     "now",    "of",
        "off",     "on",      "once",   "one",      "only",   "or",      "other",   "our",    "ours",
        "ourselves", "out",   "over",   "own",      "same",   "she",     "should",  "so",     "some",
        "someone", "something", "such", "than",     "that",   "the",     "their",   "theirs", "them",
        "themselves", "then", "there",  "these",    "they",   "this",    "those",   "through", "to",
        "too",     "under",   "until",  "up",       "upon",   "very",    "was",     "we",     "were",
        "what",    "when",    "where",  "which",    "while",  "who",     "whom",    "why",    "will",
        "with",    "would",   "you",    "your",     "yours",  "yourself", "yourselves",
    };
    return words;
}

std::string to_lower_ascii(std::string_view s)
{
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z')
            c = static_cast<char>(c - 'A' + 'a');
    return out;
}

EmbeddingTable::EmbeddingTable(std::size_t dim, StopwordSet stopwords)
    : dim_(dim), stopwords_(std::move(stopwords))
{
    if (dim == 0)
        throw Error(ErrorCode::Validation, "embedding dimension must be positive");
}

void EmbeddingTable::add(std::string_view token, DenseVector vec)
{
    if (static_cast<std::size_t>(vec.size()) != dim_)
        throw Error(ErrorCode::DimensionMismatch, "token \"" + std::string(token) + "\" has " +
                                                      std::to_string(vec.size()) + " values, expected " +
                                                      std::to_string(dim_));
    require_finite(vec, "embedding for \"" + std::string(token) + "\"");
    vectors_.insert_or_assign(to_lower_ascii(token), std::move(vec));
}

const DenseVector* EmbeddingTable::find(std::string_view token) const
{
    auto it = vectors_.find(std::string(token));
    return it == vectors_.end() ? nullptr : &it->second;
}

namespace {

bool parse_double(std::string_view tok, double& out)
{
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

EmbeddingTable parse_embeddings(std::string_view text)
{
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    while (!lines.empty() && split_ws(lines.back()).empty())
        lines.pop_back();
    if (lines.empty())
        throw Error(ErrorCode::EmptyInput, "embedding file is empty");

    const auto header = split_ws(lines[0]);
    double count_d = 0, dim_d = 0;
    if (header.size() != 2 || !parse_double(header[0], count_d) || !parse_double(header[1], dim_d) ||
        count_d < 0 || dim_d < 1)
        throw Error(ErrorCode::Parse, "line 1: expected \"<count> <dim>\" header");
    const auto count = static_cast<std::size_t>(count_d);
    const auto dim = static_cast<std::size_t>(dim_d);

    EmbeddingTable table(dim);
    std::size_t rows = 0;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto fields = split_ws(lines[ln]);
        if (fields.empty())
            continue;
        const std::string where = "line " + std::to_string(ln + 1);
        if (fields.size() != dim + 1)
            throw Error(ErrorCode::DimensionMismatch, where + ": expected " + std::to_string(dim) + " values, got " +
                                                          std::to_string(fields.size() - 1));
        DenseVector v(static_cast<Eigen::Index>(dim));
        for (std::size_t k = 0; k < dim; ++k)
            if (!parse_double(fields[k + 1], v[static_cast<Eigen::Index>(k)]))
                throw Error(ErrorCode::Parse, where + ": bad number \"" + std::string(fields[k + 1]) + "\"");
        const std::string token = to_lower_ascii(fields[0]);
        // Case variants collapse onto one lowercase token; the first row wins.
        if (!table.find(token))
            table.add(token, std::move(v));
        ++rows;
    }
    if (rows != count)
        throw Error(ErrorCode::Parse, "header announces " + std::to_string(count) + " rows, file has " +
                                          std::to_string(rows));
    return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path)
{
    try {
        return parse_embeddings(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io)
            throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

std::vector<std::string> tokenize_content(std::string_view text, const StopwordSet& stopwords)
{
    // Bytes >= 0x80 are kept inside tokens so UTF-8 words survive intact.
    auto is_word_byte = [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
    };
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i])))
            ++i;
        std::size_t j = i;
        while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j])))
            ++j;
        if (j - i >= 2) {
            std::string tok = to_lower_ascii(text.substr(i, j - i));
            if (!stopwords.contains(tok))
                out.push_back(std::move(tok));
        }
        i = j;
    }
    return out;
}

std::vector<std::string> tokenize_content(std::string_view text, const EmbeddingTable& table)
{
    return tokenize_content(text, table.stopwords());
}

TextEmbedding embed_text(std::span<const std::string> tokens, const EmbeddingTable& table)
{
    TextEmbedding out{DenseVector::Zero(static_cast<Eigen::Index>(table.dim())), 0};
    for (const std::string& tok : tokens) {
        if (const DenseVector* v = table.find(tok)) {
            out.vector += *v;
            ++out.coverage;
        }
    }
    if (out.coverage == 0)
        throw Error(ErrorCode::NoCoverage, "none of " + std::to_string(tokens.size()) + " tokens is in the vocabulary");
    out.vector /= static_cast<double>(out.coverage);
    return out;
}

}  // namespace vsd
