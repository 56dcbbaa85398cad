#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qtoken/bank_service.hpp"

namespace qtoken::bank {

/// Line-protocol front end for a Bank over a local stream socket.
///
/// Addresses are either `unix:<path>` (or a bare path starting with '/') for a
/// Unix-domain socket, or `<host>:<port>` for TCP; port 0 picks a free port.
/// Each connection gets its own thread and may pipeline any number of lines.
class LineServer {
public:
    LineServer(Bank& bank, std::string address);
    ~LineServer();
    LineServer(const LineServer&) = delete;
    LineServer& operator=(const LineServer&) = delete;

    void start();
    void stop();
    /// Address clients should connect to (with the real port for TCP port 0).
    const std::string& address() const { return bound_address_; }

private:
    void accept_loop();
    void serve(int fd, std::size_t slot);
    void release(int fd, std::size_t slot);

    Bank& bank_;
    std::string requested_;
    std::string bound_address_;
    std::string unix_path_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex clients_mu_;
    std::vector<std::thread> clients_;
    std::vector<int> client_fds_;
};

/// Blocking client for the line protocol.
class LineClient {
public:
    explicit LineClient(const std::string& address);
    ~LineClient();
    LineClient(const LineClient&) = delete;
    LineClient& operator=(const LineClient&) = delete;

    /// Sends one request line and returns the response line (without newline).
    std::string request(std::string_view line);

private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace qtoken::bank
