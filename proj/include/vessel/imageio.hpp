#pragma once

#include "vessel/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vessel {

struct LoadedImage {
    Image2D pixels;
    int bit_depth = 8;
    bool green_channel = false;  // source was colour; the green channel was taken
};

/// Reads an 8/16-bit PNG or binary PGM (P5). Colour inputs yield the green channel.
LoadedImage load_grayscale(const std::filesystem::path& path);

/// Writes a single-channel image, quantizing [0,1] to the given depth (8 or 16).
/// The container format follows the extension: ".pgm" writes P5, anything else PNG.
void save_grayscale(const std::filesystem::path& path, const Image2D& img, int bit_depth = 8);

/// Raw 16-bit integer raster, written without scaling (used for label maps).
void save_gray16(const std::filesystem::path& path, const Raster<std::uint16_t>& values);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // interleaved RGB, row-major

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* at(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x < 0 || y < 0 || x >= width || y >= height) return;
        auto* p = at(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

void save_rgb_png(const std::filesystem::path& path, const RgbImage& img);

/// Encodes to an in-memory PNG (used by the HTTP service).
std::string encode_png(const Image2D& img);
std::string encode_png(const RgbImage& img);

/// Local mean/variance normalizer. The z-score (img - local_mean) / max(local_std, 1e-6)
/// over a window x window neighbourhood (edges replicated) is mapped to
/// 0.5 + z / (2 sqrt(window^2 - 1)), which always lies in [0, 1]; zero
/// contrast maps to 0.5. `window` is odd and >= 3.
Image2D normalize_luminosity(const Image2D& img, int window);

struct OtsuLevel {
    double threshold = 0.0;  // values >= threshold are foreground
    int bin = 0;             // first foreground bin of the 256-bin histogram
};

/// Otsu's level over a 256-bin histogram spanning [min, max] of the values.
/// Throws DegenerateInput when all values are identical.
OtsuLevel otsu_level(const SoftSegmentation& seg);

BinaryMask otsu_threshold(const SoftSegmentation& seg);

}  // namespace vessel
