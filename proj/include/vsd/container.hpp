#pragma once

#include "vsd/vector.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vsd {

// Binary model container sharing the VSDF conventions (magic, u32 version,
// little-endian, u16-prefixed strings):
//
//   "VSDM" | version u32 = 1 | kind str16 | section count u32 | sections...
//   section := name str16 | tag u8 | payload
//     tag 0 (matrix):  rows u32 | cols u32 | rows*cols f64, column-major
//     tag 1 (strings): count u32 | count * str16
//
// Sections are written in name order, so equal containers encode to equal bytes.
struct ModelContainer {
    std::string kind;
    std::map<std::string, Matrix> matrices;
    std::map<std::string, std::vector<std::string>> strings;

    const Matrix& matrix(const std::string& name) const;
    const std::vector<std::string>& string_list(const std::string& name) const;
    // 1x1 matrix section read back as a scalar.
    double scalar(const std::string& name) const;
    void set_scalar(const std::string& name, double v) { matrices[name] = Matrix::Constant(1, 1, v); }
};

// Seeds are stored as a one-element decimal string section named "seed".
std::uint64_t parse_seed(const ModelContainer& c);

std::string encode_container(const ModelContainer& c);
ModelContainer decode_container(std::string_view bytes);

void write_container(const ModelContainer& c, const std::filesystem::path& path);
// Throws Validation if the stored kind differs from `expected_kind`.
ModelContainer read_container(const std::filesystem::path& path, std::string_view expected_kind);

}  // namespace vsd
