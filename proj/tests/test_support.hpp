#pragma once

// Shared helpers for the unit, integration and acceptance suites.

#include "vsd/embeddings.hpp"
#include "vsd/error.hpp"
#include "vsd/inventory.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace vsd::test {

#ifndef VSD_FIXTURE_DIR
#define VSD_FIXTURE_DIR "tests/fixtures"
#endif

inline std::filesystem::path fixture(const std::string& name)
{
    return std::filesystem::path(VSD_FIXTURE_DIR) / name;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("vsd-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline DenseVector vec(std::initializer_list<double> xs)
{
    DenseVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v[i++] = x;
    return v;
}

// {cat: [1, 0], dog: [0, 1]} with the bundled stopwords.
inline EmbeddingTable cat_dog_table()
{
    EmbeddingTable t(2);
    t.add("cat", vec({1, 0}));
    t.add("dog", vec({0, 1}));
    return t;
}

template <typename Fn>
ErrorCode error_code_of(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    throw std::runtime_error("expected a vsd::Error");
}

inline SenseEntry sense(std::string id, std::string definition, std::vector<std::string> examples = {},
                        bool depictable = true)
{
    SenseEntry s;
    s.sense_id = std::move(id);
    s.definition = std::move(definition);
    s.examples = std::move(examples);
    s.depictable = depictable;
    return s;
}

}  // namespace vsd::test
