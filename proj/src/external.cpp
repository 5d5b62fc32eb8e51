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

#include "saliex/external.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "saliex/errors.hpp"

namespace saliex {

namespace wire {

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    }
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    v = to_le(v);
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + 4);
}

void put_floats(std::vector<std::byte>& out, std::span<const float> values) {
    const std::size_t start = out.size();
    out.resize(start + values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(values[i]));
        std::memcpy(out.data() + start + i * 4, &bits, 4);
    }
}

std::uint32_t get_u32(Stream& s) {
    std::uint32_t v = 0;
    s.read_exact(std::as_writable_bytes(std::span(&v, 1)));
    return to_le(v);
}

std::vector<float> get_floats(Stream& s, std::size_t count) {
    std::vector<float> values(count);
    s.read_exact(std::as_writable_bytes(std::span(values)));
    if constexpr (std::endian::native != std::endian::little) {
        for (float& f : values) f = std::bit_cast<float>(to_le(std::bit_cast<std::uint32_t>(f)));
    }
    return values;
}

bool magic_is(const char (&got)[4], const char (&want)[4]) {
    return std::memcmp(got, want, 4) == 0;
}

constexpr std::uint32_t kMaxElements = 1u << 30;

}  // namespace

FdStream::FdStream(int read_fd, int write_fd, bool is_socket)
    : read_fd_(read_fd), write_fd_(write_fd), is_socket_(is_socket) {}

void FdStream::write_all(std::span<const std::byte> bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = is_socket_
                              ? ::send(write_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL)
                              : ::write(write_fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("write failed: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

bool FdStream::read_exact_or_eof(std::span<std::byte> bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = ::read(read_fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (done == 0) return false;
            throw TransportError("unexpected end of stream");
        }
        done += static_cast<std::size_t>(n);
    }
    return true;
}

void FdStream::read_exact(std::span<std::byte> bytes) {
    if (!read_exact_or_eof(bytes)) throw TransportError("unexpected end of stream");
}

void BufferStream::write_all(std::span<const std::byte> bytes) {
    output_.insert(output_.end(), bytes.begin(), bytes.end());
}

bool BufferStream::read_exact_or_eof(std::span<std::byte> bytes) {
    if (pos_ == input_.size() && !bytes.empty()) return false;
    if (input_.size() - pos_ < bytes.size()) throw TransportError("unexpected end of stream");
    std::memcpy(bytes.data(), input_.data() + pos_, bytes.size());
    pos_ += bytes.size();
    return true;
}

void BufferStream::read_exact(std::span<std::byte> bytes) {
    if (!read_exact_or_eof(bytes)) throw TransportError("unexpected end of stream");
}

std::vector<Image> RequestBatch::images() const {
    std::vector<Image> out;
    const std::size_t per = static_cast<std::size_t>(height) * width * channels;
    for (std::uint32_t i = 0; i < batch; ++i) {
        out.emplace_back(static_cast<int>(height), static_cast<int>(width), static_cast<int>(channels),
                         std::vector<float>(pixels.begin() + i * per, pixels.begin() + (i + 1) * per));
    }
    return out;
}

void write_request(Stream& stream, std::span<const Image> batch) {
    if (batch.empty()) throw DimensionError("empty request batch");
    const Image& first = batch.front();
    std::vector<std::byte> buf;
    buf.reserve(20 + batch.size() * first.size() * 4);
    const auto* magic = reinterpret_cast<const std::byte*>(kRequestMagic);
    buf.insert(buf.end(), magic, magic + 4);
    put_u32(buf, static_cast<std::uint32_t>(batch.size()));
    put_u32(buf, static_cast<std::uint32_t>(first.height()));
    put_u32(buf, static_cast<std::uint32_t>(first.width()));
    put_u32(buf, static_cast<std::uint32_t>(first.channels()));
    for (const Image& img : batch) {
        if (!img.same_shape(first)) throw DimensionError("request batch mixes image dimensions");
        put_floats(buf, img.pixels());
    }
    stream.write_all(buf);
}

std::optional<RequestBatch> read_request(Stream& stream) {
    char magic[4];
    if (!stream.read_exact_or_eof(std::as_writable_bytes(std::span(magic)))) return std::nullopt;
    if (!magic_is(magic, kRequestMagic)) throw FormatError("bad request magic");
    RequestBatch req;
    req.batch = get_u32(stream);
    req.height = get_u32(stream);
    req.width = get_u32(stream);
    req.channels = get_u32(stream);
    const std::uint64_t count = static_cast<std::uint64_t>(req.batch) * req.height * req.width * req.channels;
    if (count > kMaxElements) throw FormatError("request too large");
    req.pixels = get_floats(stream, static_cast<std::size_t>(count));
    return req;
}

void write_response(Stream& stream, const std::vector<std::vector<float>>& embeddings) {
    const std::uint32_t dim = embeddings.empty() ? 0 : static_cast<std::uint32_t>(embeddings.front().size());
    std::vector<std::byte> buf;
    const auto* magic = reinterpret_cast<const std::byte*>(kResponseMagic);
    buf.insert(buf.end(), magic, magic + 4);
    put_u32(buf, static_cast<std::uint32_t>(embeddings.size()));
    put_u32(buf, dim);
    for (const auto& e : embeddings) {
        if (e.size() != dim) throw DimensionError("response embeddings have mixed dimensions");
        put_floats(buf, e);
    }
    stream.write_all(buf);
}

void write_error(Stream& stream, std::string_view message) {
    std::vector<std::byte> buf;
    const auto* magic = reinterpret_cast<const std::byte*>(kErrorMagic);
    buf.insert(buf.end(), magic, magic + 4);
    put_u32(buf, static_cast<std::uint32_t>(message.size()));
    const auto* text = reinterpret_cast<const std::byte*>(message.data());
    buf.insert(buf.end(), text, text + message.size());
    stream.write_all(buf);
}

std::vector<std::vector<float>> read_response(Stream& stream) {
    char magic[4];
    stream.read_exact(std::as_writable_bytes(std::span(magic)));
    if (magic_is(magic, kErrorMagic)) {
        const std::uint32_t len = get_u32(stream);
        if (len > (1u << 20)) throw TransportError("oversized error frame");
        std::string message(len, '\0');
        stream.read_exact(std::as_writable_bytes(std::span(message.data(), message.size())));
        throw TransportError("external embedder error: " + message);
    }
    if (!magic_is(magic, kResponseMagic)) throw TransportError("bad response magic");
    const std::uint32_t batch = get_u32(stream);
    const std::uint32_t dim = get_u32(stream);
    if (static_cast<std::uint64_t>(batch) * dim > kMaxElements) throw TransportError("response too large");
    std::vector<std::vector<float>> out(batch);
    for (auto& e : out) e = get_floats(stream, dim);
    return out;
}

}  // namespace wire

class ExternalEmbedder::Connection {
public:
    static std::unique_ptr<Connection> spawn(const std::string& command);
    static std::unique_ptr<Connection> connect(const std::string& address);

    ~Connection();

    wire::Stream& stream() { return *stream_; }
    std::string diagnostics();

private:
    Connection() = default;

    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    int socket_ = -1;
    std::string stderr_path_;
    std::unique_ptr<wire::FdStream> stream_;
};

std::unique_ptr<ExternalEmbedder::Connection> ExternalEmbedder::Connection::spawn(const std::string& command) {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
        throw TransportError(std::string("pipe failed: ") + std::strerror(errno));
    }
    char path[] = "/tmp/saliex-ext-XXXXXX";
    const int err_fd = ::mkstemp(path);
    if (err_fd < 0) throw TransportError(std::string("mkstemp failed: ") + std::strerror(errno));

    const pid_t pid = ::fork();
    if (pid < 0) throw TransportError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_fd, STDERR_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_fd);

    std::unique_ptr<Connection> conn(new Connection());
    conn->pid_ = pid;
    conn->to_child_ = in_pipe[1];
    conn->from_child_ = out_pipe[0];
    conn->stderr_path_ = path;
    conn->stream_ = std::make_unique<wire::FdStream>(conn->from_child_, conn->to_child_);
    return conn;
}

std::unique_ptr<ExternalEmbedder::Connection> ExternalEmbedder::Connection::connect(const std::string& address) {
    const auto colon = address.rfind(':');
    const std::string host = address.substr(0, colon);
    const std::string port = address.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
        throw TransportError("cannot resolve " + address + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    std::string last_error = "no address";
    for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        last_error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) throw TransportError("cannot connect to " + address + ": " + last_error);
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

    std::unique_ptr<Connection> conn(new Connection());
    conn->socket_ = fd;
    conn->stream_ = std::make_unique<wire::FdStream>(fd, fd, true);
    return conn;
}

ExternalEmbedder::Connection::~Connection() {
    if (socket_ >= 0) ::close(socket_);
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        bool reaped = false;
        for (int i = 0; i < 100 && !reaped; ++i) {
            reaped = ::waitpid(pid_, &status, WNOHANG) == pid_;
            if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (!reaped) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
        }
    }
    if (!stderr_path_.empty()) ::unlink(stderr_path_.c_str());
}

std::string ExternalEmbedder::Connection::diagnostics() {
    std::ostringstream out;
    if (pid_ > 0) {
        int status = 0;
        // Give a crashing child a moment to finish writing stderr and exit.
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                if (WIFEXITED(status)) out << " [exit status " << WEXITSTATUS(status) << "]";
                if (WIFSIGNALED(status)) out << " [killed by signal " << WTERMSIG(status) << "]";
                pid_ = -1;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
    }
    if (!stderr_path_.empty()) {
        std::ifstream in(stderr_path_, std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (text.size() > 2048) text = text.substr(text.size() - 2048);
        if (!text.empty()) out << " [stderr: " << text << "]";
    }
    return out.str();
}

ExternalEmbedder::ExternalEmbedder(EmbedderSpec spec) : spec_(std::move(spec)) {
    if (spec_.max_batch < 1) throw ConfigError("max_batch", "must be >= 1");
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

ExternalEmbedder::~ExternalEmbedder() = default;

std::unique_ptr<ExternalEmbedder::Connection> ExternalEmbedder::acquire() const {
    {
        std::lock_guard lock(mutex_);
        if (!idle_.empty()) {
            auto conn = std::move(idle_.back());
            idle_.pop_back();
            return conn;
        }
    }
    return spec_.command.empty() ? Connection::connect(spec_.address) : Connection::spawn(spec_.command);
}

void ExternalEmbedder::release(std::unique_ptr<Connection> conn) const {
    std::lock_guard lock(mutex_);
    idle_.push_back(std::move(conn));
}

std::vector<std::vector<float>> ExternalEmbedder::features(std::span<const Image> batch) const {
    const std::size_t chunk = static_cast<std::size_t>(spec_.max_batch);
    const std::size_t chunks = (batch.size() + chunk - 1) / chunk;
    std::vector<std::vector<std::vector<float>>> parts(chunks);
    std::vector<std::exception_ptr> errors(chunks);
    const auto n = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto sub = batch.subspan(static_cast<std::size_t>(i) * chunk,
                                       std::min(chunk, batch.size() - static_cast<std::size_t>(i) * chunk));
        std::unique_ptr<Connection> conn;
        try {
            conn = acquire();
            wire::write_request(conn->stream(), sub);
            parts[i] = wire::read_response(conn->stream());
            if (parts[i].size() != sub.size()) {
                throw TransportError("external embedder answered " + std::to_string(parts[i].size()) +
                                     " embeddings for " + std::to_string(sub.size()) + " images");
            }
            release(std::move(conn));
        } catch (const Error& e) {
            const std::string extra = conn ? conn->diagnostics() : std::string();
            errors[i] = std::make_exception_ptr(TransportError(std::string(e.what()) + extra));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    std::vector<std::vector<float>> out;
    out.reserve(batch.size());
    for (auto& part : parts) {
        for (auto& e : part) out.push_back(std::move(e));
    }
    return out;
}

std::string ExternalEmbedder::describe() const { return spec_.to_string(); }

}  // namespace saliex
