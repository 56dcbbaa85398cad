#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtoken/bank_service.hpp"

namespace qtoken::bank {

/// One request line: `<VERB> <series> <I> <hex>`.
struct WireRequest {
    std::string verb;
    std::string series;
    std::uint32_t index = 0;
    std::string payload_hex;

    /// Empty on a malformed line (wrong field count, bad integer, non-hex payload).
    static std::optional<WireRequest> parse(std::string_view line);
    std::string to_line() const;
};

/// Parses a response line produced by Decision::to_wire.
std::optional<Decision> parse_response(std::string_view line);

/// One log line: `<verb> <series> <I> <payload> <decision>`. For MINT records
/// the integer field carries k and the payload the secret.
struct LogRecord {
    std::string verb;
    std::string series;
    std::uint64_t number = 0;
    std::string payload_hex;
    std::string decision;  ///< `OK` or `REJECT:<reason>`

    static std::optional<LogRecord> parse(std::string_view line);
    std::string to_line() const;
};

std::string decision_token(const Decision& d);

/// Whitespace-separated fields; tabs and repeated spaces are accepted.
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace qtoken::bank
