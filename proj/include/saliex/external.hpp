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

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saliex/embedder.hpp"

namespace saliex {

namespace wire {

// Binary, little-endian framing shared by the subprocess and TCP transports.
//   request : "SXE1" | u32 batch | u32 H | u32 W | u32 C | batch*H*W*C f32
//   response: "SXR1" | u32 batch | u32 d | batch*d f32
//   error   : "SXE!" | u32 len | UTF-8 message
inline constexpr char kRequestMagic[4] = {'S', 'X', 'E', '1'};
inline constexpr char kResponseMagic[4] = {'S', 'X', 'R', '1'};
inline constexpr char kErrorMagic[4] = {'S', 'X', 'E', '!'};

/// Blocking byte stream. Implementations throw TransportError on failure.
class Stream {
public:
    virtual ~Stream() = default;
    virtual void write_all(std::span<const std::byte> bytes) = 0;
    virtual void read_exact(std::span<std::byte> bytes) = 0;
    /// Like read_exact, but returns false on a clean end of stream before any byte.
    virtual bool read_exact_or_eof(std::span<std::byte> bytes) = 0;
};

/// Stream over a pair of file descriptors (pipes or one socket for both).
class FdStream final : public Stream {
public:
    FdStream(int read_fd, int write_fd, bool is_socket = false);

    void write_all(std::span<const std::byte> bytes) override;
    void read_exact(std::span<std::byte> bytes) override;
    bool read_exact_or_eof(std::span<std::byte> bytes) override;

private:
    int read_fd_;
    int write_fd_;
    bool is_socket_;
};

/// In-memory stream used by tests: reads consume `input`, writes append to `output`.
class BufferStream final : public Stream {
public:
    explicit BufferStream(std::vector<std::byte> input = {}) : input_(std::move(input)) {}

    void write_all(std::span<const std::byte> bytes) override;
    void read_exact(std::span<std::byte> bytes) override;
    bool read_exact_or_eof(std::span<std::byte> bytes) override;

    const std::vector<std::byte>& output() const noexcept { return output_; }

private:
    std::vector<std::byte> input_;
    std::size_t pos_ = 0;
    std::vector<std::byte> output_;
};

struct RequestBatch {
    std::uint32_t batch = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t channels = 0;
    std::vector<float> pixels;

    std::vector<Image> images() const;
};

void write_request(Stream& stream, std::span<const Image> batch);
/// nullopt on clean end of stream; FormatError on a bad magic.
std::optional<RequestBatch> read_request(Stream& stream);

void write_response(Stream& stream, const std::vector<std::vector<float>>& embeddings);
void write_error(Stream& stream, std::string_view message);
/// Throws TransportError carrying the remote message on an error frame.
std::vector<std::vector<float>> read_response(Stream& stream);

}  // namespace wire

/// Adapter for a model served by another process, speaking the wire protocol
/// over the child's stdin/stdout (`ext:cmd=`) or a TCP socket (`ext:tcp=`).
/// Each connection is a serial channel; concurrent callers draw from a pool and
/// open new connections on demand.
class ExternalEmbedder final : public Embedder {
public:
    explicit ExternalEmbedder(EmbedderSpec spec);
    ~ExternalEmbedder() override;

    std::vector<std::vector<float>> features(std::span<const Image> batch) const override;
    std::string describe() const override;

    class Connection;

private:
    std::unique_ptr<Connection> acquire() const;
    void release(std::unique_ptr<Connection> conn) const;

    EmbedderSpec spec_;
    mutable std::mutex mutex_;
    mutable std::vector<std::unique_ptr<Connection>> idle_;
};

}  // namespace saliex
