#include <cstdio>
#include <cstring>

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include "attacca/errors.hpp"
#include "attacca/pipeline.hpp"

namespace attacca {

UdpEmitter::UdpEmitter(const std::string& host, int port) {
    if (port < 1 || port > 65535)
        throw config_error("UDP port out of range: " + std::to_string(port));
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* result = nullptr;
    const int rc =
        getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &result);
    if (rc != 0 || result == nullptr)
        throw io_error("cannot resolve UDP peer " + host + ": " +
                       gai_strerror(rc));
    fd_ = socket(result->ai_family, SOCK_DGRAM, 0);
    if (fd_ < 0) {
        freeaddrinfo(result);
        throw io_error("cannot open UDP socket: " + std::string(strerror(errno)));
    }
    addr_.assign((const std::uint8_t*)result->ai_addr,
                 (const std::uint8_t*)result->ai_addr + result->ai_addrlen);
    freeaddrinfo(result);
}

UdpEmitter::~UdpEmitter() {
    if (fd_ >= 0) close(fd_);
}

std::string UdpEmitter::format_datagram(int frame, int state, int num_states) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d %d %d\n", frame, state, num_states);
    return buf;
}

bool UdpEmitter::send(int frame, int state, int num_states) {
    const std::string msg = format_datagram(frame, state, num_states);
    const ssize_t sent =
        sendto(fd_, msg.data(), msg.size(), 0, (const sockaddr*)addr_.data(),
               (socklen_t)addr_.size());
    if (sent != (ssize_t)msg.size()) {
        ++errors_;
        return false;
    }
    return true;
}

} // namespace attacca
