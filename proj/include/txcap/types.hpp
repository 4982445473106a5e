// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace txcap
{
/// 256-bit unsigned word with wrap-around arithmetic.
using u256 = boost::multiprecision::uint256_t;

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

inline constexpr uint64_t kWeiPerShannon = 1'000'000'000ULL;
inline const u256 kWeiPerEther = u256{1'000'000'000'000'000'000ULL};

/// Base error for every recoverable failure surfaced by the library.
/// `code` is a stable machine-readable name (e.g. "NonceMismatch").
class Error : public std::runtime_error
{
public:
    Error(std::string code, std::string detail, std::string rule = {})
      : std::runtime_error(code + ": " + detail),
        code_(std::move(code)),
        detail_(std::move(detail)),
        rule_(std::move(rule))
    {}

    const std::string& code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::string& rule() const noexcept { return rule_; }

private:
    std::string code_;
    std::string detail_;
    std::string rule_;
};

template <size_t N>
struct FixedBytes
{
    std::array<uint8_t, N> bytes{};

    static constexpr size_t size = N;

    auto operator<=>(const FixedBytes&) const = default;

    bool is_zero() const noexcept
    {
        for (auto b : bytes)
            if (b != 0)
                return false;
        return true;
    }
};

struct Address : FixedBytes<20>
{
    auto operator<=>(const Address&) const = default;

    std::string hex() const;
    static Address from_hex(std::string_view text);
    /// Low 20 bytes of a word.
    static Address from_word(const u256& word);
    u256 to_word() const;
};

struct Hash32 : FixedBytes<32>
{
    auto operator<=>(const Hash32&) const = default;

    std::string hex() const;
    static Hash32 from_hex(std::string_view text);
    static Hash32 from_word(const u256& word);
    u256 to_word() const;
};

std::string to_hex(BytesView data);
/// Accepts an optional 0x prefix; throws Error{"BadHex"} on malformed input.
Bytes from_hex(std::string_view text);

/// Big-endian 32-byte encoding.
std::array<uint8_t, 32> word_to_be(const u256& v);
u256 word_from_be(BytesView data);

/// Decimal or 0x-hex text to a word.
u256 parse_u256(std::string_view text);
std::string to_dec(const u256& v);

/// SHA-256 digest; used wherever a stable 32-byte digest is needed.
Hash32 digest(BytesView data);
Hash32 digest(std::string_view text);

}  // namespace txcap

template <>
struct std::hash<txcap::Address>
{
    size_t operator()(const txcap::Address& a) const noexcept
    {
        size_t h = 0;
        for (auto b : a.bytes)
            h = h * 131 + b;
        return h;
    }
};

template <>
struct std::hash<txcap::Hash32>
{
    size_t operator()(const txcap::Hash32& a) const noexcept
    {
        size_t h = 0;
        for (size_t i = 0; i < 8; ++i)
            h = (h << 8) | a.bytes[i];
        return h;
    }
};
