#pragma once

// Small helpers shared by the line-oriented text formats.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "addrnet/capability.hpp"

namespace addrnet::text {

struct Token {
    std::string_view text;
    std::size_t column = 1;  // 1-based
};

std::vector<Token> tokenize(std::string_view line);

std::vector<std::string_view> split_lines(std::string_view text);

std::string hex(std::uint64_t v);

/// Decimal or 0x-prefixed hexadecimal.
std::optional<std::uint64_t> parse_u64(std::string_view s);

/// `<node>:<addr>`
std::optional<Name> parse_name(std::string_view s);
std::string print_name(const Name& n);

std::optional<CapType> parse_cap_type(std::string_view s);

std::optional<Rights> parse_rights(std::string_view s);

}  // namespace addrnet::text
