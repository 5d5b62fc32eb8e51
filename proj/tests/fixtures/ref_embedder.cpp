/*
 * Copyright 2026 The saliex Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reference external embedder used by the wire-protocol tests.
//
// Speaks the request/response framing with its own minimal codec (not the
// library's) and answers with raw random projections, so its output should
// match the in-process toy:rand-proj embedder after normalization.
//
//   ref_embedder [--dim D] [--seed S] [--fail error|crash|garbage] [--tcp PORT]
//
// With --tcp it listens on 127.0.0.1:PORT (0 picks a free port, printed on
// stdout) and serves each connection on its own thread.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "saliex/embedder.hpp"

namespace {

int g_dim = 128;
std::uint64_t g_seed = 7;
std::string g_fail;

bool read_all(int fd, void* dst, std::size_t n) {
    auto* p = static_cast<char*>(dst);
    while (n > 0) {
        const ssize_t got = ::read(fd, p, n);
        if (got <= 0) return false;
        p += got;
        n -= static_cast<std::size_t>(got);
    }
    return true;
}

bool write_all(int fd, const void* src, std::size_t n) {
    const auto* p = static_cast<const char*>(src);
    while (n > 0) {
        const ssize_t put = ::write(fd, p, n);
        if (put <= 0) return false;
        p += put;
        n -= static_cast<std::size_t>(put);
    }
    return true;
}

void serve(int in_fd, int out_fd) {
    for (;;) {
        char magic[4];
        std::uint32_t hdr[4];
        if (!read_all(in_fd, magic, 4)) return;
        if (std::memcmp(magic, "SXE1", 4) != 0 || !read_all(in_fd, hdr, sizeof(hdr))) {
            std::fprintf(stderr, "ref_embedder: bad request\n");
            return;
        }
        const std::uint32_t batch = hdr[0];
        const std::size_t per = static_cast<std::size_t>(hdr[1]) * hdr[2] * hdr[3];
        std::vector<float> pixels(batch * per);
        if (!read_all(in_fd, pixels.data(), pixels.size() * 4)) return;

        if (g_fail == "crash") {
            std::fprintf(stderr, "ref_embedder: simulated crash\n");
            std::fflush(stderr);
            std::abort();
        }
        if (g_fail == "error") {
            const std::string msg = "model not loaded";
            const std::uint32_t len = static_cast<std::uint32_t>(msg.size());
            write_all(out_fd, "SXE!", 4);
            write_all(out_fd, &len, 4);
            write_all(out_fd, msg.data(), msg.size());
            continue;
        }
        if (g_fail == "garbage") {
            write_all(out_fd, "NOPE", 4);
            continue;
        }

        const auto w = saliex::projection_weights(g_dim, g_seed, per);
        std::vector<float> out(static_cast<std::size_t>(batch) * g_dim);
        for (std::uint32_t b = 0; b < batch; ++b) {
            const float* x = pixels.data() + b * per;
            for (int r = 0; r < g_dim; ++r) {
                double acc = 0.0;
                const float* row = w.data() + static_cast<std::size_t>(r) * per;
                for (std::size_t c = 0; c < per; ++c) acc += static_cast<double>(row[c]) * x[c];
                out[static_cast<std::size_t>(b) * g_dim + r] = static_cast<float>(acc);
            }
        }
        const std::uint32_t head[2] = {batch, static_cast<std::uint32_t>(g_dim)};
        if (!write_all(out_fd, "SXR1", 4) || !write_all(out_fd, head, sizeof(head)) ||
            !write_all(out_fd, out.data(), out.size() * 4)) {
            return;
        }
    }
}

int serve_tcp(int port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd, 16) != 0) {
        std::perror("ref_embedder");
        return 1;
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    std::printf("%d\n", ntohs(addr.sin_port));
    std::fflush(stdout);
    for (;;) {
        const int conn = ::accept(fd, nullptr, nullptr);
        if (conn < 0) continue;
        std::thread([conn] {
            serve(conn, conn);
            ::close(conn);
        }).detach();
    }
}

}  // namespace

int main(int argc, char** argv) {
    int tcp_port = -1;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string key = argv[i];
        if (key == "--dim") g_dim = std::atoi(argv[i + 1]);
        else if (key == "--seed") g_seed = std::strtoull(argv[i + 1], nullptr, 10);
        else if (key == "--fail") g_fail = argv[i + 1];
        else if (key == "--tcp") tcp_port = std::atoi(argv[i + 1]);
        else {
            std::fprintf(stderr, "ref_embedder: unknown option %s\n", key.c_str());
            return 2;
        }
    }
    if (tcp_port >= 0) return serve_tcp(tcp_port);
    serve(STDIN_FILENO, STDOUT_FILENO);
    return 0;
}
