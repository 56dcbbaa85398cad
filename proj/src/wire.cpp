#include "qtoken/wire.hpp"

#include <algorithm>
#include <charconv>

namespace qtoken::bank {

namespace {

bool is_hex(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

template <typename T>
std::optional<T> parse_uint(std::string_view s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::optional<WireRequest> WireRequest::parse(std::string_view line) {
    const auto f = split_fields(line);
    if (f.size() != 4) return std::nullopt;
    auto index = parse_uint<std::uint32_t>(f[2]);
    if (!index || !is_hex(f[3])) return std::nullopt;
    return WireRequest{std::string(f[0]), std::string(f[1]), *index, std::string(f[3])};
}

std::string WireRequest::to_line() const {
    return verb + " " + series + " " + std::to_string(index) + " " + payload_hex;
}

std::string Decision::to_wire() const {
    switch (status) {
        case Status::Ok: return payload.empty() ? "OK" : "OK " + payload;
        case Status::Reject: return "REJECT " + reason;
        case Status::Error: return "ERROR " + reason;
    }
    return "ERROR internal";
}

std::optional<Decision> parse_response(std::string_view line) {
    const auto f = split_fields(line);
    if (f.empty() || f.size() > 2) return std::nullopt;
    const std::string second = f.size() > 1 ? std::string(f[1]) : std::string();
    if (f[0] == "OK") return Decision::accept(second);
    if (f.size() != 2) return std::nullopt;
    if (f[0] == "REJECT") return Decision::reject(second);
    if (f[0] == "ERROR") return Decision::error(second);
    return std::nullopt;
}

std::string decision_token(const Decision& d) {
    return d.ok() ? std::string("OK") : "REJECT:" + d.reason;
}

std::optional<LogRecord> LogRecord::parse(std::string_view line) {
    const auto f = split_fields(line);
    if (f.size() != 5) return std::nullopt;
    auto number = parse_uint<std::uint64_t>(f[2]);
    if (!number || !is_hex(f[3])) return std::nullopt;
    if (f[4] != "OK" && !f[4].starts_with("REJECT:")) return std::nullopt;
    return LogRecord{std::string(f[0]), std::string(f[1]), *number, std::string(f[3]),
                     std::string(f[4])};
}

std::string LogRecord::to_line() const {
    return verb + " " + series + " " + std::to_string(number) + " " + payload_hex + " " + decision;
}

}  // namespace qtoken::bank
