#pragma once

// Little-endian encode/decode helpers shared by the binary file formats.

#include "vsd/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace vsd::detail {

class ByteWriter {
public:
    void bytes(std::string_view b) { out_.append(b); }

    template <typename UInt>
    void uint(UInt v)
    {
        for (std::size_t i = 0; i < sizeof(UInt); ++i)
            out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

    void str16(std::string_view s)
    {
        if (s.size() > 0xFFFF)
            throw Error(ErrorCode::Validation, "string longer than 65535 bytes");
        uint(static_cast<std::uint16_t>(s.size()));
        bytes(s);
    }

    const std::string& data() const { return out_; }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view in) : in_(in) {}

    std::string_view bytes(std::size_t n)
    {
        need(n);
        std::string_view out = in_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    template <typename UInt>
    UInt uint()
    {
        need(sizeof(UInt));
        UInt v = 0;
        for (std::size_t i = 0; i < sizeof(UInt); ++i)
            v |= static_cast<UInt>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += sizeof(UInt);
        return v;
    }

    float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

    std::string str16()
    {
        const auto n = uint<std::uint16_t>();
        return std::string(bytes(n));
    }

    bool at_end() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n)
            throw Error(ErrorCode::Truncated, "unexpected end of data at byte " + std::to_string(pos_));
    }

    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace vsd::detail
