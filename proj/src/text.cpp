#include "text.hpp"

#include <charconv>
#include <cstdio>

namespace addrnet::text {

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        s.remove_prefix(2);
        base = 16;
    }
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<Name> parse_name(std::string_view s) {
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    const auto node = parse_u64(s.substr(0, colon));
    const auto addr = parse_u64(s.substr(colon + 1));
    if (!node || !addr || *node > 0xffff) return std::nullopt;
    return Name{static_cast<NodeId>(*node), *addr};
}

std::string print_name(const Name& n) { return std::to_string(n.node) + ":" + hex(n.addr); }

std::optional<CapType> parse_cap_type(std::string_view s) {
    if (s == "ram") return CapType::ram();
    if (s == "frame") return CapType::frame();
    if (s == "address-space") return CapType::address_space();
    if (s == "asid-range") return CapType::asid_range();
    if (s == "mapping") return CapType::mapping();
    constexpr std::string_view ts = "tstructure:";
    if (s.substr(0, ts.size()) == ts) {
        const auto level = parse_u64(s.substr(ts.size()));
        if (!level || *level > 255) return std::nullopt;
        return CapType::tstructure(static_cast<std::uint8_t>(*level));
    }
    return std::nullopt;
}

std::optional<Rights> parse_rights(std::string_view s) {
    if (s == "-") return kNoRights;
    Rights r = kNoRights;
    for (char c : s) {
        if (c == 'a') r = r | kAccess;
        else if (c == 'm') r = r | kMap;
        else if (c == 'g') r = r | kGrant;
        else return std::nullopt;
    }
    return r;
}

}  // namespace addrnet::text
