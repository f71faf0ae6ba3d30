#include "vsd/container.hpp"

#include "binary.hpp"
#include "vsd/error.hpp"
#include "vsd/io.hpp"

namespace vsd {

namespace {
constexpr std::string_view kMagic = "VSDM";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kMatrixTag = 0;
constexpr std::uint8_t kStringsTag = 1;
}  // namespace

const Matrix& ModelContainer::matrix(const std::string& name) const
{
    auto it = matrices.find(name);
    if (it == matrices.end())
        throw Error(ErrorCode::MissingKey, kind + " container has no matrix section \"" + name + "\"");
    return it->second;
}

const std::vector<std::string>& ModelContainer::string_list(const std::string& name) const
{
    auto it = strings.find(name);
    if (it == strings.end())
        throw Error(ErrorCode::MissingKey, kind + " container has no string section \"" + name + "\"");
    return it->second;
}

double ModelContainer::scalar(const std::string& name) const
{
    const Matrix& m = matrix(name);
    if (m.rows() != 1 || m.cols() != 1)
        throw Error(ErrorCode::Validation, "section \"" + name + "\" is not a scalar");
    return m(0, 0);
}

std::uint64_t parse_seed(const ModelContainer& c)
{
    const auto& list = c.string_list("seed");
    try {
        if (list.size() == 1)
            return std::stoull(list.front());
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::Validation, c.kind + " container has a malformed seed section");
}

std::string encode_container(const ModelContainer& c)
{
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.uint<std::uint32_t>(kVersion);
    w.str16(c.kind);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(c.matrices.size() + c.strings.size()));

    // Merge both maps in name order.
    auto m = c.matrices.begin();
    auto s = c.strings.begin();
    while (m != c.matrices.end() || s != c.strings.end()) {
        const bool take_matrix = s == c.strings.end() || (m != c.matrices.end() && m->first < s->first);
        if (take_matrix) {
            w.str16(m->first);
            w.uint<std::uint8_t>(kMatrixTag);
            w.uint<std::uint32_t>(static_cast<std::uint32_t>(m->second.rows()));
            w.uint<std::uint32_t>(static_cast<std::uint32_t>(m->second.cols()));
            for (Eigen::Index j = 0; j < m->second.cols(); ++j)
                for (Eigen::Index i = 0; i < m->second.rows(); ++i)
                    w.f64(m->second(i, j));
            ++m;
        } else {
            w.str16(s->first);
            w.uint<std::uint8_t>(kStringsTag);
            w.uint<std::uint32_t>(static_cast<std::uint32_t>(s->second.size()));
            for (const std::string& str : s->second)
                w.str16(str);
            ++s;
        }
    }
    return w.data();
}

ModelContainer decode_container(std::string_view bytes)
{
    detail::ByteReader r(bytes);
    if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic)
        throw Error(ErrorCode::BadMagic, "not a VSDM model file");
    const auto version = r.uint<std::uint32_t>();
    if (version != kVersion)
        throw Error(ErrorCode::Validation, "unsupported VSDM version " + std::to_string(version));

    ModelContainer c;
    c.kind = r.str16();
    const auto sections = r.uint<std::uint32_t>();
    for (std::uint32_t k = 0; k < sections; ++k) {
        std::string name = r.str16();
        if (c.matrices.contains(name) || c.strings.contains(name))
            throw Error(ErrorCode::DuplicateId, "section \"" + name + "\"");
        const auto tag = r.uint<std::uint8_t>();
        if (tag == kMatrixTag) {
            const auto rows = r.uint<std::uint32_t>();
            const auto cols = r.uint<std::uint32_t>();
            if (static_cast<std::uint64_t>(rows) * cols * 8 > r.remaining())
                throw Error(ErrorCode::Truncated, "matrix section \"" + name + "\"");
            Matrix mat(rows, cols);
            for (Eigen::Index j = 0; j < mat.cols(); ++j)
                for (Eigen::Index i = 0; i < mat.rows(); ++i)
                    mat(i, j) = r.f64();
            c.matrices.emplace(std::move(name), std::move(mat));
        } else if (tag == kStringsTag) {
            const auto count = r.uint<std::uint32_t>();
            std::vector<std::string> list;
            for (std::uint32_t i = 0; i < count; ++i)
                list.push_back(r.str16());
            c.strings.emplace(std::move(name), std::move(list));
        } else {
            throw Error(ErrorCode::Validation, "unknown section tag " + std::to_string(tag));
        }
    }
    if (!r.at_end())
        throw Error(ErrorCode::Validation, "trailing bytes after last section");
    return c;
}

void write_container(const ModelContainer& c, const std::filesystem::path& path)
{
    write_file(path, encode_container(c));
}

ModelContainer read_container(const std::filesystem::path& path, std::string_view expected_kind)
{
    ModelContainer c;
    try {
        c = decode_container(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io)
            throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
    if (c.kind != expected_kind)
        throw Error(ErrorCode::Validation, path.string() + ": expected a " + std::string(expected_kind) +
                                               " model, found " + c.kind);
    return c;
}

}  // namespace vsd
