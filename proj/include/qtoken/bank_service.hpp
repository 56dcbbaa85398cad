#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qtoken/token_scheme.hpp"

namespace qtoken::bank {

enum class Status { Ok, Reject, Error };

/// Reason strings used on the wire and in the log.
namespace reason {
inline constexpr std::string_view kBadValue = "bad-value";
inline constexpr std::string_view kDoubleSpend = "double-spend";
inline constexpr std::string_view kDoubleVote = "double-vote";
inline constexpr std::string_view kBudgetExhausted = "budget-exhausted";
inline constexpr std::string_view kUnknownSeries = "unknown-series";
inline constexpr std::string_view kIndexOutOfRange = "index-out-of-range";
inline constexpr std::string_view kMalformed = "malformed";
inline constexpr std::string_view kUnknownVerb = "unknown-verb";
inline constexpr std::string_view kStorage = "storage";
}  // namespace reason

struct Decision {
    Status status = Status::Error;
    std::string reason;   ///< set for Reject and Error
    std::string payload;  ///< set for an OK decode (hex message)

    bool ok() const { return status == Status::Ok; }
    static Decision accept(std::string payload = {}) { return {Status::Ok, {}, std::move(payload)}; }
    static Decision reject(std::string_view why) { return {Status::Reject, std::string(why), {}}; }
    static Decision error(std::string_view why) { return {Status::Error, std::string(why), {}}; }

    /// `OK`, `OK <payload>`, `REJECT <reason>` or `ERROR <reason>`.
    std::string to_wire() const;
    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Thrown by Bank::open when the log cannot be replayed.
class LogCorruption : public std::runtime_error {
public:
    LogCorruption(std::uint64_t offset, const std::string& what);
    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

enum class SyncMode {
    Fsync,  ///< fsync after every record, before responding
    Flush,  ///< flush to the OS only
};

/// The bank's classical side: per-series secrets and verification histories,
/// with every state change appended to a log before the response is issued.
///
/// Each series is guarded by its own mutex, so all mutations of one series
/// are linearized while different series proceed concurrently.
class Bank {
public:
    /// In-memory bank with no log.
    Bank();
    ~Bank();
    Bank(const Bank&) = delete;
    Bank& operator=(const Bank&) = delete;

    /// Opens (creating if missing) the log at `path` and replays it.
    /// Throws LogCorruption on a malformed, torn or inconsistent record.
    static std::unique_ptr<Bank> open(const std::filesystem::path& path,
                                      SyncMode mode = SyncMode::Fsync);

    /// Registers a series keyed by secret.series_id(). Throws if the id is
    /// taken, malformed, or the secret is not indexed with 4 | k.
    void create_series(SecretString secret);
    bool has_series(std::string_view series_id) const;

    Decision handle_verify(std::string_view series_id, const TokenReport& report);
    Decision handle_decode(std::string_view series_id, std::uint32_t index, std::uint32_t cipher);
    Decision handle_vote(std::string_view series_id, std::uint32_t index, std::uint32_t cipher);

    /// Parses and dispatches one request line of the wire protocol.
    Decision handle_line(std::string_view line);

    std::optional<SchemeParams> params(std::string_view series_id) const;
    std::uint64_t attempts(std::string_view series_id) const;
    VerificationHistory history(std::string_view series_id) const;
    /// Snapshot of decoded vote value -> count.
    std::map<std::uint32_t, std::uint64_t> tally(std::string_view series_id) const;

private:
    struct Series;
    struct LogWriter;

    Series* find(std::string_view series_id) const;
    Decision apply(Series& s, std::string_view verb, std::uint32_t index, std::uint32_t payload,
                   bool replay);
    void install_series(SecretString secret, bool log_it);
    void replay(std::istream& in);

    mutable std::shared_mutex series_mu_;
    std::map<std::string, std::unique_ptr<Series>, std::less<>> series_;
    std::unique_ptr<LogWriter> log_;
};

/// XOR of a message with a pad, as the OTP sender computes C = R xor M.
inline std::uint32_t otp_encode(std::uint32_t pad, std::uint32_t message) { return pad ^ message; }
/// The bank's decryption C xor F_S(I).
std::uint32_t otp_decode(const SecretString& secret, std::uint32_t index, std::uint32_t cipher);

bool valid_series_id(std::string_view id);

}  // namespace qtoken::bank
