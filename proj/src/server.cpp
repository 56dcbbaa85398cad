#include "qtoken/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace qtoken::bank {

namespace {

struct ParsedAddress {
    bool is_unix = false;
    std::string path;
    std::string host;
    std::string port;
};

ParsedAddress parse_address(const std::string& address) {
    ParsedAddress a;
    if (address.starts_with("unix:")) {
        a.is_unix = true;
        a.path = address.substr(5);
    } else if (address.starts_with("/")) {
        a.is_unix = true;
        a.path = address;
    } else {
        const auto colon = address.rfind(':');
        if (colon == std::string::npos) throw std::invalid_argument("address needs host:port");
        a.host = address.substr(0, colon);
        a.port = address.substr(colon + 1);
        if (a.host.empty()) a.host = "127.0.0.1";
    }
    if (a.is_unix && (a.path.empty() || a.path.size() >= sizeof(sockaddr_un::sun_path))) {
        throw std::invalid_argument("bad unix socket path '" + a.path + "'");
    }
    return a;
}

[[noreturn]] void sys_fail(const std::string& what) {
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

sockaddr_un unix_sockaddr(const std::string& path) {
    sockaddr_un sa{};
    sa.sun_family = AF_UNIX;
    std::strncpy(sa.sun_path, path.c_str(), sizeof(sa.sun_path) - 1);
    return sa;
}

bool write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// LineServer

LineServer::LineServer(Bank& bank, std::string address)
    : bank_(bank), requested_(std::move(address)) {}

LineServer::~LineServer() { stop(); }

void LineServer::start() {
    const ParsedAddress a = parse_address(requested_);
    if (a.is_unix) {
        listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (listen_fd_ < 0) sys_fail("socket");
        ::unlink(a.path.c_str());
        const sockaddr_un sa = unix_sockaddr(a.path);
        if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
            sys_fail("bind " + a.path);
        }
        unix_path_ = a.path;
        bound_address_ = "unix:" + a.path;
    } else {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        hints.ai_flags = AI_PASSIVE;
        addrinfo* res = nullptr;
        if (::getaddrinfo(a.host.c_str(), a.port.c_str(), &hints, &res) != 0 || !res) {
            throw std::runtime_error("cannot resolve " + requested_);
        }
        listen_fd_ = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
        if (listen_fd_ < 0) {
            ::freeaddrinfo(res);
            sys_fail("socket");
        }
        const int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0) {
            ::freeaddrinfo(res);
            sys_fail("bind " + requested_);
        }
        ::freeaddrinfo(res);
        sockaddr_in bound{};
        socklen_t len = sizeof(bound);
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
        bound_address_ = a.host + ":" + std::to_string(ntohs(bound.sin_port));
    }
    if (::listen(listen_fd_, 128) != 0) sys_fail("listen");
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void LineServer::stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) acceptor_.join();
    {
        std::lock_guard lock(clients_mu_);
        for (int fd : client_fds_) {
            if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
        }
    }
    for (auto& t : clients_) {
        if (t.joinable()) t.join();
    }
    clients_.clear();
    client_fds_.clear();
    if (!unix_path_.empty()) ::unlink(unix_path_.c_str());
}

void LineServer::accept_loop() {
    while (running_) {
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;
        }
        std::lock_guard lock(clients_mu_);
        const std::size_t slot = client_fds_.size();
        client_fds_.push_back(fd);
        clients_.emplace_back([this, fd, slot] { serve(fd, slot); });
    }
}

void LineServer::serve(int fd, std::size_t slot) {
    std::string buffer;
    char chunk[4096];
    for (;;) {
        std::size_t nl;
        while ((nl = buffer.find('\n')) != std::string::npos) {
            const std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (!write_all(fd, bank_.handle_line(line).to_wire() + "\n")) {
                release(fd, slot);
                return;
            }
        }
        const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
    release(fd, slot);
}

void LineServer::release(int fd, std::size_t slot) {
    std::lock_guard lock(clients_mu_);
    ::close(fd);
    client_fds_[slot] = -1;
}

// ---------------------------------------------------------------------------
// LineClient

LineClient::LineClient(const std::string& address) {
    const ParsedAddress a = parse_address(address);
    if (a.is_unix) {
        fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (fd_ < 0) sys_fail("socket");
        const sockaddr_un sa = unix_sockaddr(a.path);
        if (::connect(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
            ::close(fd_);
            sys_fail("connect " + address);
        }
        return;
    }
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(a.host.c_str(), a.port.c_str(), &hints, &res) != 0 || !res) {
        throw std::runtime_error("cannot resolve " + address);
    }
    fd_ = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
    if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
        ::freeaddrinfo(res);
        if (fd_ >= 0) ::close(fd_);
        sys_fail("connect " + address);
    }
    ::freeaddrinfo(res);
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

LineClient::~LineClient() {
    if (fd_ >= 0) ::close(fd_);
}

std::string LineClient::request(std::string_view line) {
    if (!write_all(fd_, std::string(line) + "\n")) sys_fail("send");
    char chunk[4096];
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string out = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return out;
        }
        const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw std::runtime_error("connection closed by server");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

}  // namespace qtoken::bank
