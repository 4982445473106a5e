// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/types.hpp>

#include <openssl/sha.h>

namespace txcap
{
namespace
{
int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::string_view strip_0x(std::string_view text)
{
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
        text.remove_prefix(2);
    return text;
}

template <size_t N>
std::array<uint8_t, N> fixed_from_hex(std::string_view text, const char* what)
{
    const auto raw = from_hex(text);
    if (raw.size() != N)
        throw Error{"BadHex", std::string{what} + " must be " + std::to_string(N) + " bytes, got " +
                                  std::to_string(raw.size())};
    std::array<uint8_t, N> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}
}  // namespace

std::string to_hex(BytesView data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 + data.size() * 2);
    out += "0x";
    for (auto b : data)
    {
        out += digits[b >> 4];
        out += digits[b & 0xf];
    }
    return out;
}

Bytes from_hex(std::string_view text)
{
    text = strip_0x(text);
    if (text.size() % 2 != 0)
        throw Error{"BadHex", "odd number of hex digits"};
    Bytes out;
    out.reserve(text.size() / 2);
    for (size_t i = 0; i < text.size(); i += 2)
    {
        const int hi = hex_digit(text[i]);
        const int lo = hex_digit(text[i + 1]);
        if (hi < 0 || lo < 0)
            throw Error{"BadHex", "invalid hex digit in '" + std::string{text} + "'"};
        out.push_back(static_cast<uint8_t>(hi * 16 + lo));
    }
    return out;
}

std::string Address::hex() const
{
    return to_hex(bytes);
}

Address Address::from_hex(std::string_view text)
{
    return Address{{fixed_from_hex<20>(text, "address")}};
}

Address Address::from_word(const u256& word)
{
    const auto be = word_to_be(word);
    Address a;
    std::copy(be.begin() + 12, be.end(), a.bytes.begin());
    return a;
}

u256 Address::to_word() const
{
    return word_from_be(bytes);
}

std::string Hash32::hex() const
{
    return to_hex(bytes);
}

Hash32 Hash32::from_hex(std::string_view text)
{
    return Hash32{{fixed_from_hex<32>(text, "hash")}};
}

Hash32 Hash32::from_word(const u256& word)
{
    return Hash32{{word_to_be(word)}};
}

u256 Hash32::to_word() const
{
    return word_from_be(bytes);
}

std::array<uint8_t, 32> word_to_be(const u256& v)
{
    std::array<uint8_t, 32> out{};
    u256 x = v;
    for (int i = 31; i >= 0; --i)
    {
        out[static_cast<size_t>(i)] = static_cast<uint8_t>(x & 0xff);
        x >>= 8;
    }
    return out;
}

u256 word_from_be(BytesView data)
{
    u256 v = 0;
    for (auto b : data)
        v = (v << 8) | b;
    return v;
}

u256 parse_u256(std::string_view text)
{
    if (text.empty())
        throw Error{"BadNumber", "empty number"};
    const auto hex = strip_0x(text);
    if (hex.size() != text.size())
    {
        if (hex.empty() || hex.size() > 64)
            throw Error{"BadNumber", "bad hex number '" + std::string{text} + "'"};
        u256 v = 0;
        for (char c : hex)
        {
            const int d = hex_digit(c);
            if (d < 0)
                throw Error{"BadNumber", "bad hex number '" + std::string{text} + "'"};
            v = (v << 4) | d;
        }
        return v;
    }
    using boost::multiprecision::uint512_t;
    uint512_t v = 0;
    for (char c : text)
    {
        if (c < '0' || c > '9')
            throw Error{"BadNumber", "bad decimal number '" + std::string{text} + "'"};
        v = v * 10 + (c - '0');
        if (v > uint512_t{std::numeric_limits<u256>::max()})
            throw Error{"BadNumber", "number exceeds 256 bits"};
    }
    return static_cast<u256>(v);
}

std::string to_dec(const u256& v)
{
    return v.str();
}

Hash32 digest(BytesView data)
{
    Hash32 h;
    SHA256(data.data(), data.size(), h.bytes.data());
    return h;
}

Hash32 digest(std::string_view text)
{
    return digest(BytesView{reinterpret_cast<const uint8_t*>(text.data()), text.size()});
}

}  // namespace txcap
