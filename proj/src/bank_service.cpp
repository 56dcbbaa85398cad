#include "qtoken/bank_service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

#include "qtoken/hex.hpp"
#include "qtoken/wire.hpp"

namespace qtoken::bank {

namespace {

constexpr std::string_view kVerify = "VERIFY";
constexpr std::string_view kDecode = "DECODE";
constexpr std::string_view kVote = "VOTE";
constexpr std::string_view kMint = "MINT";

}  // namespace

LogCorruption::LogCorruption(std::uint64_t offset, const std::string& what)
    : std::runtime_error("log corrupted at byte offset " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

bool valid_series_id(std::string_view id) {
    if (id.empty() || id.size() > 128) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_' || c == '.';
    });
}

std::uint32_t otp_decode(const SecretString& secret, std::uint32_t index, std::uint32_t cipher) {
    return cipher ^ secret.block(index);
}

struct Bank::Series {
    explicit Series(SecretString s) : params(SchemeParams::for_k(s.k())), secret(std::move(s)) {}

    SchemeParams params;
    SecretString secret;
    VerificationHistory history;
    std::uint64_t attempts = 0;
    std::map<std::uint32_t, std::uint64_t> tally;
    mutable std::mutex mu;
};

struct Bank::LogWriter {
    LogWriter(const std::filesystem::path& path, SyncMode mode) : mode(mode) {
        fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd < 0) {
            throw std::runtime_error("cannot open log " + path.string() + ": " +
                                     std::strerror(errno));
        }
    }
    ~LogWriter() {
        if (fd >= 0) ::close(fd);
    }

    bool append(const std::string& record) {
        std::lock_guard lock(mu);
        std::string line = record + "\n";
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            const ssize_t n = ::write(fd, p, left);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        if (mode == SyncMode::Fsync && ::fsync(fd) != 0) return false;
        return true;
    }

    int fd = -1;
    SyncMode mode;
    std::mutex mu;
};

Bank::Bank() = default;
Bank::~Bank() = default;

std::unique_ptr<Bank> Bank::open(const std::filesystem::path& path, SyncMode mode) {
    auto bank = std::make_unique<Bank>();
    if (std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read log " + path.string());
        bank->replay(in);
    }
    bank->log_ = std::make_unique<LogWriter>(path, mode);
    return bank;
}

void Bank::replay(std::istream& in) {
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::uint64_t offset = 0;
    while (offset < data.size()) {
        const std::size_t nl = data.find('\n', offset);
        if (nl == std::string::npos) throw LogCorruption(offset, "truncated final record");
        const std::string_view line(data.data() + offset, nl - offset);
        const auto rec = LogRecord::parse(line);
        if (!rec) throw LogCorruption(offset, "malformed record");

        try {
            if (rec->verb == kMint) {
                if (rec->number < 4 || rec->number > 28) throw std::invalid_argument("bad k");
                const int k = static_cast<int>(rec->number);
                install_series(SecretString::from_hex(k, std::uint64_t{1} << k, rec->payload_hex,
                                                      rec->series),
                               false);
            } else if (rec->verb == kVerify || rec->verb == kDecode || rec->verb == kVote) {
                Series* s = find(rec->series);
                if (!s) throw std::invalid_argument("record for unknown series");
                if (rec->number > UINT32_MAX) throw std::invalid_argument("index too large");
                const auto payload =
                    static_cast<std::uint32_t>(hex_to_uint(rec->payload_hex, s->params.k));
                std::lock_guard lock(s->mu);
                const Decision d =
                    apply(*s, rec->verb, static_cast<std::uint32_t>(rec->number), payload, true);
                if (decision_token(d) != rec->decision || d.status == Status::Error) {
                    throw std::invalid_argument("replayed decision " + d.to_wire() +
                                                " differs from logged " + rec->decision);
                }
            } else {
                throw std::invalid_argument("unknown verb '" + rec->verb + "'");
            }
        } catch (const LogCorruption&) {
            throw;
        } catch (const std::exception& e) {
            throw LogCorruption(offset, e.what());
        }
        offset = nl + 1;
    }
}

void Bank::install_series(SecretString secret_in, bool log_it) {
    if (!valid_series_id(secret_in.series_id())) {
        throw std::invalid_argument("invalid series id '" + secret_in.series_id() + "'");
    }
    if (!secret_in.indexed()) throw std::invalid_argument("series secret must be indexed");
    auto series = std::make_unique<Series>(std::move(secret_in));
    const SecretString& secret = series->secret;
    std::unique_lock lock(series_mu_);
    if (series_.contains(secret.series_id())) {
        throw std::invalid_argument("series '" + secret.series_id() + "' already exists");
    }
    if (log_it && log_) {
        const LogRecord rec{std::string(kMint), secret.series_id(),
                            static_cast<std::uint64_t>(secret.k()), secret.to_hex(), "OK"};
        if (!log_->append(rec.to_line())) throw std::runtime_error("log write failed");
    }
    series_.emplace(secret.series_id(), std::move(series));
}

void Bank::create_series(SecretString secret) { install_series(std::move(secret), true); }

bool Bank::has_series(std::string_view series_id) const { return find(series_id) != nullptr; }

Bank::Series* Bank::find(std::string_view series_id) const {
    std::shared_lock lock(series_mu_);
    auto it = series_.find(series_id);
    return it == series_.end() ? nullptr : it->second.get();
}

// Caller holds s.mu. Evaluates one submission, persists it and updates the
// in-memory state, in that order.
Decision Bank::apply(Series& s, std::string_view verb, std::uint32_t index, std::uint32_t payload,
                     bool replay) {
    const std::uint64_t space = s.params.index_space();
    const bool pad_request = verb == kDecode || verb == kVote;
    if (pad_request && (index < 1 || index > space)) return Decision::error(reason::kIndexOutOfRange);
    if (s.attempts >= s.params.cap_test) return Decision::reject(reason::kBudgetExhausted);

    TokenReport entry;
    Decision d;
    std::uint32_t vote = 0;
    if (verb == kVerify) {
        entry = {index, payload};
        if (index < 1 || index > space || s.secret.block(index) != payload) {
            d = Decision::reject(reason::kBadValue);
        } else if (s.history.contains(entry)) {
            d = Decision::reject(reason::kDoubleSpend);
        } else {
            d = Decision::accept();
        }
    } else if (pad_request) {
        // The pad (I, F_S(I)) shares the freshness ledger with VERIFY.
        entry = {index, s.secret.block(index)};
        vote = otp_decode(s.secret, index, payload);
        if (s.history.contains(entry)) {
            d = Decision::reject(verb == kVote ? reason::kDoubleVote : reason::kDoubleSpend);
        } else {
            d = Decision::accept(verb == kDecode ? uint_to_hex(vote, s.params.k) : std::string());
        }
    } else {
        return Decision::error(reason::kUnknownVerb);
    }

    if (!replay && log_) {
        const LogRecord rec{std::string(verb), s.secret.series_id(), index,
                            uint_to_hex(payload, s.params.k), decision_token(d)};
        if (!log_->append(rec.to_line())) return Decision::error(reason::kStorage);
    }
    s.history.append(entry);
    ++s.attempts;
    if (verb == kVote && d.ok()) ++s.tally[vote];
    return d;
}

Decision Bank::handle_verify(std::string_view series_id, const TokenReport& report) {
    Series* s = find(series_id);
    if (!s) return Decision::error(reason::kUnknownSeries);
    if (report.value >> s->params.k) return Decision::error(reason::kMalformed);
    std::lock_guard lock(s->mu);
    return apply(*s, kVerify, report.index, report.value, false);
}

Decision Bank::handle_decode(std::string_view series_id, std::uint32_t index,
                             std::uint32_t cipher) {
    Series* s = find(series_id);
    if (!s) return Decision::error(reason::kUnknownSeries);
    if (cipher >> s->params.k) return Decision::error(reason::kMalformed);
    std::lock_guard lock(s->mu);
    return apply(*s, kDecode, index, cipher, false);
}

Decision Bank::handle_vote(std::string_view series_id, std::uint32_t index, std::uint32_t cipher) {
    Series* s = find(series_id);
    if (!s) return Decision::error(reason::kUnknownSeries);
    if (cipher >> s->params.k) return Decision::error(reason::kMalformed);
    std::lock_guard lock(s->mu);
    return apply(*s, kVote, index, cipher, false);
}

Decision Bank::handle_line(std::string_view line) {
    const auto req = WireRequest::parse(line);
    if (!req) return Decision::error(reason::kMalformed);
    if (req->verb != kVerify && req->verb != kDecode && req->verb != kVote) {
        return Decision::error(reason::kUnknownVerb);
    }
    Series* s = find(req->series);
    if (!s) return Decision::error(reason::kUnknownSeries);
    std::uint32_t payload = 0;
    try {
        payload = static_cast<std::uint32_t>(hex_to_uint(req->payload_hex, s->params.k));
    } catch (const std::invalid_argument&) {
        return Decision::error(reason::kMalformed);
    }
    if (req->verb == kVerify) return handle_verify(req->series, {req->index, payload});
    if (req->verb == kDecode) return handle_decode(req->series, req->index, payload);
    return handle_vote(req->series, req->index, payload);
}

std::optional<SchemeParams> Bank::params(std::string_view series_id) const {
    const Series* s = find(series_id);
    if (!s) return std::nullopt;
    return s->params;
}

std::uint64_t Bank::attempts(std::string_view series_id) const {
    const Series* s = find(series_id);
    if (!s) throw std::out_of_range("unknown series");
    std::lock_guard lock(s->mu);
    return s->attempts;
}

VerificationHistory Bank::history(std::string_view series_id) const {
    const Series* s = find(series_id);
    if (!s) throw std::out_of_range("unknown series");
    std::lock_guard lock(s->mu);
    return s->history;
}

std::map<std::uint32_t, std::uint64_t> Bank::tally(std::string_view series_id) const {
    const Series* s = find(series_id);
    if (!s) throw std::out_of_range("unknown series");
    std::lock_guard lock(s->mu);
    return s->tally;
}

}  // namespace qtoken::bank
