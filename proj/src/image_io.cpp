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

#include "saliex/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "saliex/errors.hpp"

namespace saliex {

namespace {

constexpr Rgb8 kColormap[256] = {
#include "colormap_table.inc"
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Image load_image(const std::filesystem::path& path, int height, int width, int channels) {
    const std::string bytes = read_file(path);
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8U, const_cast<char*>(bytes.data()));
    cv::Mat decoded = bytes.empty() ? cv::Mat() : cv::imdecode(raw, cv::IMREAD_UNCHANGED);
    if (decoded.empty()) throw FormatError("cannot decode image " + path.string());

    double scale = 1.0 / 255.0;
    if (decoded.depth() == CV_16U) scale = 1.0 / 65535.0;
    else if (decoded.depth() != CV_8U) throw FormatError("unsupported pixel depth in " + path.string());

    const int src_channels = decoded.channels();
    if (src_channels != 1 && src_channels != 3 && src_channels != 4) {
        throw FormatError("unsupported channel count in " + path.string());
    }
    Image src(decoded.rows, decoded.cols, channels);
    for (int r = 0; r < decoded.rows; ++r) {
        for (int c = 0; c < decoded.cols; ++c) {
            double rgb[3];
            for (int k = 0; k < 3; ++k) {
                // OpenCV stores BGR(A).
                const int idx = src_channels == 1 ? 0 : 2 - k;
                rgb[k] = decoded.depth() == CV_8U
                             ? decoded.ptr<std::uint8_t>(r)[c * src_channels + idx]
                             : decoded.ptr<std::uint16_t>(r)[c * src_channels + idx];
            }
            if (channels == 3) {
                for (int k = 0; k < 3; ++k) src.at(r, c, k) = static_cast<float>(rgb[k] * scale);
            } else if (src_channels == 1) {
                src.at(r, c, 0) = static_cast<float>(rgb[0] * scale);
            } else {
                const double y = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
                src.at(r, c, 0) = static_cast<float>(std::clamp(y * scale, 0.0, 1.0));
            }
        }
    }
    return resize_bilinear(center_crop(src, height, width), height, width);
}

Image center_crop(const Image& image, int height, int width) {
    if (height <= 0 || width <= 0) throw DimensionError("crop target must be positive");
    const long long h = image.height();
    const long long w = image.width();
    long long crop_h = h;
    long long crop_w = w;
    if (w * height > h * width) {
        crop_w = std::max(1LL, (h * width + height / 2) / height);
    } else if (w * height < h * width) {
        crop_h = std::max(1LL, (w * height + width / 2) / width);
    }
    if (crop_h == h && crop_w == w) return image;
    const int top = static_cast<int>((h - crop_h) / 2);
    const int left = static_cast<int>((w - crop_w) / 2);
    Image out(static_cast<int>(crop_h), static_cast<int>(crop_w), image.channels());
    for (int r = 0; r < crop_h; ++r) {
        for (int c = 0; c < crop_w; ++c) {
            for (int k = 0; k < image.channels(); ++k) out.at(r, c, k) = image.at(top + r, left + c, k);
        }
    }
    return out;
}

Image resize_bilinear(const Image& image, int height, int width) {
    if (image.height() == height && image.width() == width) return image;
    Image out(height, width, image.channels());
    const double sy = static_cast<double>(image.height()) / height;
    const double sx = static_cast<double>(image.width()) / width;
    for (int r = 0; r < height; ++r) {
        const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
        const int y0 = static_cast<int>(y);
        const int y1 = std::min(y0 + 1, image.height() - 1);
        const double fy = y - y0;
        for (int c = 0; c < width; ++c) {
            const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
            const int x0 = static_cast<int>(x);
            const int x1 = std::min(x0 + 1, image.width() - 1);
            const double fx = x - x0;
            for (int k = 0; k < image.channels(); ++k) {
                const double top = (1 - fx) * image.at(y0, x0, k) + fx * image.at(y0, x1, k);
                const double bottom = (1 - fx) * image.at(y1, x0, k) + fx * image.at(y1, x1, k);
                out.at(r, c, k) = static_cast<float>((1 - fy) * top + fy * bottom);
            }
        }
    }
    return out;
}

void save_png(const Image& image, const std::filesystem::path& path) {
    cv::Mat mat(image.height(), image.width(), image.channels() == 3 ? CV_8UC3 : CV_8UC1);
    for (int r = 0; r < image.height(); ++r) {
        auto* row = mat.ptr<std::uint8_t>(r);
        for (int c = 0; c < image.width(); ++c) {
            for (int k = 0; k < image.channels(); ++k) {
                const int dst = image.channels() == 3 ? 2 - k : 0;
                const double v = std::clamp(static_cast<double>(image.at(r, c, k)), 0.0, 1.0);
                row[c * image.channels() + dst] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    std::vector<std::uint8_t> encoded;
    if (!cv::imencode(".png", mat, encoded)) throw IoError("cannot encode PNG for " + path.string());
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(encoded.size()));
    if (!out) throw IoError("cannot write " + path.string());
}

std::string encode_pfm(const SaliencyMap& map) {
    std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n-1.0\n";
    const std::size_t header = out.size();
    out.resize(header + map.size() * 4);
    char* dst = out.data() + header;
    for (int r = map.height() - 1; r >= 0; --r) {
        for (int c = 0; c < map.width(); ++c) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(map.at(r, c));
            if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
            std::memcpy(dst, &bits, 4);
            dst += 4;
        }
    }
    return out;
}

SaliencyMap decode_pfm(std::span<const char> bytes) {
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return std::string(bytes.data() + start, pos - start);
    };
    const std::string magic = token();
    if (magic == "PF") throw FormatError("color PFM is not supported");
    if (magic != "Pf") throw FormatError("not a grayscale PFM");
    int width = 0;
    int height = 0;
    double scale = 0.0;
    try {
        std::size_t used = 0;
        const std::string w = token(), h = token(), s = token();
        width = std::stoi(w, &used);
        if (used != w.size()) throw FormatError("bad width");
        height = std::stoi(h, &used);
        if (used != h.size()) throw FormatError("bad height");
        scale = std::stod(s, &used);
        if (used != s.size()) throw FormatError("bad scale");
    } catch (const std::logic_error&) {
        throw FormatError("malformed PFM header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0) throw FormatError("malformed PFM header");
    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= bytes.size()) throw FormatError("truncated PFM");
    ++pos;
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (bytes.size() - pos != count * 4) throw FormatError("PFM raster size does not match header");
    const bool swap = (scale < 0) != (std::endian::native == std::endian::little);
    SaliencyMap map(height, width);
    const char* src = bytes.data() + pos;
    for (int r = height - 1; r >= 0; --r) {
        for (int c = 0; c < width; ++c) {
            std::uint32_t bits;
            std::memcpy(&bits, src, 4);
            if (swap) bits = __builtin_bswap32(bits);
            map.at(r, c) = std::bit_cast<float>(bits);
            src += 4;
        }
    }
    return map;
}

void save_pfm(const SaliencyMap& map, const std::filesystem::path& path) {
    const std::string data = encode_pfm(map);
    std::ofstream out(path, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("cannot write " + path.string());
}

SaliencyMap load_pfm(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    try {
        return decode_pfm(data);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::span<const Rgb8, 256> colormap() { return std::span<const Rgb8, 256>(kColormap); }

Image render_overlay(const Image& image, const SaliencyMap& map, double alpha) {
    if (image.height() != map.height() || image.width() != map.width()) {
        throw DimensionError("overlay map and image dimensions differ");
    }
    alpha = std::clamp(alpha, 0.0, 1.0);
    float peak = 0.0f;
    for (float v : map.values()) peak = std::max(peak, std::abs(v));
    Image out(image.height(), image.width(), 3);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            const double n = peak > 0.0f ? map.at(r, c) / peak : 0.0;
            const auto idx = static_cast<std::size_t>(std::lround(std::clamp(n, 0.0, 1.0) * 255.0));
            const Rgb8& color = kColormap[idx];
            for (int k = 0; k < 3; ++k) {
                const double base = image.at(r, c, image.channels() == 3 ? k : 0);
                const double v = (1.0 - alpha) * base + alpha * (color[k] / 255.0);
                out.at(r, c, k) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

}  // namespace saliex
